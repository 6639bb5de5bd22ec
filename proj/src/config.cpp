#include "bdy/config.hpp"

#include "bdy/epsilon_boltzmann.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bdy {

using json = nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "agent-equilibrium", "meanfield-entropy", "entropy-decay", "quasi-invariant",
      "linear-decay",      "inequality-suite",  "moment-odes",
  };
  return names;
}

namespace {

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& key) {
  const double v = get_number(j, key);
  if (!(v > 0)) throw ConfigError(key, "must be positive");
  return v;
}

int get_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(key, "expected an integer");
  const auto v = j.get<long long>();
  if (v <= 0 || v > 2'000'000'000LL) throw ConfigError(key, "must be a positive integer");
  return static_cast<int>(v);
}

std::vector<double> get_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(get_number(x, key));
  return out;
}

bool is_whole(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");

  RunConfig cfg;
  for (const auto& [key, val] : doc.items()) {
    if (key == "experiment") {
      if (!val.is_string()) throw ConfigError(key, "expected a string");
      cfg.experiment = val.get<std::string>();
    } else if (key == "mu") {
      cfg.mu = get_positive(val, key);
    } else if (key == "lambda") {
      cfg.lambda = get_positive(val, key);
    } else if (key == "epsilon") {
      cfg.epsilon = get_positive(val, key);
    } else if (key == "epsilon_list") {
      cfg.epsilon_list = get_list(val, key);
      if (cfg.epsilon_list.empty()) throw ConfigError(key, "must not be empty");
      for (double e : cfg.epsilon_list)
        if (!(e > 0)) throw ConfigError(key, "entries must be positive");
    } else if (key == "v_max") {
      cfg.v_max = get_positive(val, key);
    } else if (key == "n_cells") {
      cfg.n_cells = get_count(val, key);
    } else if (key == "dt") {
      cfg.dt = get_positive(val, key);
    } else if (key == "t_end") {
      cfg.t_end = get_positive(val, key);
    } else if (key == "snapshot_times") {
      cfg.snapshot_times = get_list(val, key);
      for (double t : cfg.snapshot_times)
        if (t < 0) throw ConfigError(key, "times must be non-negative");
    } else if (key == "n_agents") {
      cfg.n_agents = get_count(val, key);
    } else if (key == "n_max") {
      cfg.n_max = get_count(val, key);
    } else if (key == "seed") {
      if (!val.is_number_unsigned() && !(val.is_number_integer() && val.get<long long>() >= 0))
        throw ConfigError(key, "expected a non-negative integer");
      cfg.seed = val.get<std::uint64_t>();
    } else if (key == "out_dir") {
      if (!val.is_string() || val.get<std::string>().empty()) throw ConfigError(key, "expected a non-empty string");
      cfg.out_dir = val.get<std::string>();
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (cfg.experiment.empty()) throw ConfigError("experiment", "missing");
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
    throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");
  if (cfg.epsilon && !cfg.epsilon_list.empty())
    throw ConfigError("epsilon_list", "give either epsilon or epsilon_list, not both");
  cfg.source_json = doc.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ResolvedConfig resolve_config(const RunConfig& cfg) {
  ResolvedConfig rc;
  rc.raw = cfg;
  const std::string& ex = cfg.experiment;
  const bool linear = ex == "linear-decay" || ex == "inequality-suite";

  // grid
  ModelParams<double> p;
  p.mu = cfg.mu;
  p.lambda = cfg.lambda;
  p.v_max = cfg.v_max.value_or((linear ? 25.0 : 40.0) * cfg.mu);
  const double default_h = ex == "linear-decay" ? 0.02 : 0.01;
  p.n_cells = cfg.n_cells.value_or(static_cast<int>(std::lround(p.v_max / default_h)));
  if (p.n_cells < 16) throw ConfigError("n_cells", "must be at least 16");
  p.epsilon = cfg.epsilon.value_or(ex == "moment-odes" ? 0.2 : 0.1);
  if (!(p.epsilon < p.v_max)) throw ConfigError(cfg.epsilon ? "epsilon" : "v_max", "need epsilon < v_max");
  rc.params = p;
  const double h = p.h();

  // time
  double default_t = 1;
  if (ex == "agent-equilibrium") default_t = 200;
  else if (ex == "meanfield-entropy") default_t = 100;
  else if (ex == "entropy-decay") default_t = 20;
  else if (ex == "quasi-invariant") default_t = 2;
  else if (ex == "linear-decay") default_t = 12;
  rc.t_end = cfg.t_end.value_or(default_t);

  if (ex == "meanfield-entropy") {
    rc.dt = cfg.dt.value_or(0.01);
    if (rc.dt > 0.1) throw ConfigError("dt", "mean-field RK4 needs dt <= 0.1");
  } else if (linear) {
    rc.dt = cfg.dt.value_or(0.8 * h * h / p.lambda);
    if (p.lambda / 2 * rc.dt / (h * h) > 0.4) throw ConfigError("dt", "exceeds the diffusion limit (lambda/2) dt/h^2 <= 0.4");
  } else if (ex != "agent-equilibrium") {
    rc.dt = cfg.dt.value_or(default_fp_dt(p));
    if (p.lambda / 2 * rc.dt / (h * h) > 0.5) throw ConfigError("dt", "exceeds the diffusion limit (lambda/2) dt/h^2 <= 1/2");
  }
  if (rc.dt > 0 && rc.dt > rc.t_end && ex != "moment-odes") throw ConfigError("dt", "larger than t_end");

  // epsilon sweep
  if (ex == "quasi-invariant") {
    rc.epsilon_list = !cfg.epsilon_list.empty() ? cfg.epsilon_list
                      : cfg.epsilon         ? std::vector<double>{*cfg.epsilon}
                                            : std::vector<double>{0.4, 0.2, 0.1, 0.05};
  } else if (ex == "moment-odes") {
    rc.epsilon_list = {p.epsilon};
  }
  for (double e : rc.epsilon_list) {
    const char* key = cfg.epsilon_list.empty() ? "epsilon" : "epsilon_list";
    if (!(e < p.v_max)) throw ConfigError(key, "must be below v_max");
    try {
      (void)grid_shift(p, e);
    } catch (const std::invalid_argument&) {
      throw ConfigError(key, "each epsilon must be an integer multiple of the cell width v_max/n_cells");
    }
  }

  // snapshots
  if (!cfg.snapshot_times.empty()) {
    rc.snapshot_times = cfg.snapshot_times;
    for (double t : rc.snapshot_times)
      if (t > rc.t_end) throw ConfigError("snapshot_times", "times must not exceed t_end");
  } else {
    rc.snapshot_times = {0, rc.t_end / 8, rc.t_end / 4, rc.t_end / 2, rc.t_end};
  }
  std::sort(rc.snapshot_times.begin(), rc.snapshot_times.end());
  rc.snapshot_times.erase(std::unique(rc.snapshot_times.begin(), rc.snapshot_times.end()), rc.snapshot_times.end());

  // particles and pmf truncation
  rc.n_agents = cfg.n_agents.value_or(10000);
  if (rc.n_agents < 2) throw ConfigError("n_agents", "must be at least 2");
  rc.n_max = cfg.n_max.value_or(default_n_max(cfg.mu));
  if (ex == "meanfield-entropy") {
    if (!is_whole(cfg.mu)) throw ConfigError("mu", "the point-mass start needs an integer mu");
    if (rc.n_max <= static_cast<int>(std::lround(cfg.mu))) throw ConfigError("n_max", "must exceed mu");
  }
  if (ex == "agent-equilibrium" && !is_whole(cfg.mu) && !is_whole(cfg.mu * rc.n_agents))
    throw ConfigError("mu", "mu * n_agents must be an integer number of coins");
  return rc;
}

}  // namespace bdy

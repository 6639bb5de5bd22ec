#include "bdy/experiments.hpp"

#include "bdy/agent_sim.hpp"
#include "bdy/csv.hpp"
#include "bdy/diagnostics.hpp"
#include "bdy/epsilon_boltzmann.hpp"
#include "bdy/fokker_planck.hpp"
#include "bdy/linearized.hpp"
#include "bdy/meanfield.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#ifndef BDY_GIT_DESCRIBE
#define BDY_GIT_DESCRIBE "unknown"
#endif

namespace bdy {

using json = nlohmann::json;
namespace fs = std::filesystem;

int thread_cap() {
  if (const char* env = std::getenv("BDY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string experiment_summary(const std::string& name) {
  if (name == "agent-equilibrium") return "agent simulation against the geometric and exponential equilibria";
  if (name == "meanfield-entropy") return "mean-field ODE from a point mass: conservation and entropy decay";
  if (name == "entropy-decay") return "Fokker-Planck run from the Gamma-type datum: entropy, dissipation, snapshots";
  if (name == "quasi-invariant") return "d2 distance between epsilon-Boltzmann and Fokker-Planck endpoints over an epsilon sweep";
  if (name == "linear-decay") return "linearized energy against the exp(-t/(6 mu^2)) envelope";
  if (name == "inequality-suite") return "randomized boundary, Poincare and Johnson-Barron inequality checks";
  if (name == "moment-odes") return "finite-difference moment rates against the closed-form moment ODEs";
  return "";
}

namespace {

const std::vector<std::string> kTimeseriesHeader{
    "t",      "mass",        "mean",   "m2",     "m3",            "f0",        "entropy",
    "dissipation", "fisher", "lambda", "fisher_lambda", "hellinger", "l1"};

void write_row(CsvWriter& w, const DiagnosticsRow& r) {
  w.row({r.t, r.mass, r.mean, r.m2, r.m3, r.boundary_value, r.entropy, r.dissipation, r.fisher, r.lambda_bdry,
         r.fisher_lambda, r.hellinger, r.l1});
}

std::vector<double> uniform_times(double t_end, int n) {
  std::vector<double> ts;
  for (int k = 0; k <= n; ++k) ts.push_back(t_end * k / n);
  return ts;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

struct Context {
  const ResolvedConfig& cfg;
  fs::path dir;
  std::ostream& log;
  RunReport report;
  json summary = json::object();

  std::string path(const std::string& name) {
    report.files.push_back(name);
    return (dir / name).string();
  }
};

void write_snapshots(Context& ctx, const std::vector<double>& times, const std::vector<GridFunction<double>>& snaps) {
  CsvWriter w(ctx.path("snapshots.csv"), {"t", "v", "f"});
  for (std::size_t s = 0; s < snaps.size(); ++s)
    for (Eigen::Index j = 0; j < snaps[s].size(); ++j) w.row({times[s], snaps[s].center(j), snaps[s][j]});
}

// ---------------------------------------------------------------------------

void agent_equilibrium(Context& ctx) {
  const auto& c = ctx.cfg;
  const double mu = c.params.mu;
  const bool whole = std::abs(mu - std::round(mu)) < 1e-9;
  ParticleEnsemble e = init_ensemble(c.n_agents, mu, whole ? InitMode::equal : InitMode::multinomial, c.raw.seed);
  Rng rng(c.raw.seed ^ 0x9e3779b97f4a7c15ULL);
  const long long events = run_discrete_until(e, c.t_end, rng, c.params.lambda);

  const Pmf<double> emp = empirical_pmf(e);
  const int n_top = std::max<int>(c.n_max, static_cast<int>(emp.n_max()));
  const Pmf<double> geo = geometric_equilibrium(mu, n_top);
  Vector<double> expo(n_top + 1);
  for (int n = 0; n <= n_top; ++n) expo[n] = std::exp(-n / mu) * -std::expm1(-1 / mu);
  const Pmf<double> exp_pmf(expo);

  CsvWriter w(ctx.path("equilibrium.csv"), {"n", "empirical", "geometric", "exponential"});
  for (int n = 0; n <= n_top; ++n) w.row({double(n), emp[n], geo[n], exp_pmf[n]});

  ctx.summary["events"] = events;
  ctx.summary["l1_geometric"] = l1_distance(emp, geo);
  ctx.summary["l1_exponential"] = l1_distance(emp, exp_pmf);
  ctx.summary["rich_fraction"] = emp.rich_fraction();
  ctx.summary["rich_fraction_equilibrium"] = mu / (1 + mu);
  ctx.summary["wealth_drift"] = compensated_total(e) - e.total_wealth;
  ctx.log << "l1 to geometric " << l1_distance(emp, geo) << " after " << events << " events\n";
}

void meanfield_entropy(Context& ctx) {
  const auto& c = ctx.cfg;
  const int start = static_cast<int>(std::lround(c.params.mu));
  const Pmf<double> p0 = delta_pmf<double>(start, c.n_max);
  const Pmf<double> pstar = geometric_equilibrium(c.params.mu, c.n_max);
  const int every = std::max(1, static_cast<int>(std::lround(c.t_end / (400 * c.dt))));
  const OdeTrajectory<double> tr = integrate(p0, c.t_end, c.dt, every);

  CsvWriter w(ctx.path("meanfield.csv"), {"t", "mass", "mean", "r", "entropy", "l1"});
  double mass_drift = 0, mean_drift = 0, max_increase = -std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.states) {
    const double H = entropy_pmf(s.pmf, pstar);
    w.row({s.t, s.pmf.total(), s.pmf.mean(), s.r, H, l1_distance(s.pmf, pstar)});
    mass_drift = std::max(mass_drift, std::abs(s.pmf.total() - 1));
    mean_drift = std::max(mean_drift, std::abs(s.pmf.mean() - start));
    if (std::isfinite(prev)) max_increase = std::max(max_increase, H - prev);
    prev = H;
  }
  ctx.summary["max_mass_drift"] = mass_drift;
  ctx.summary["max_mean_drift"] = mean_drift;
  ctx.summary["max_entropy_increase"] = max_increase;
  ctx.summary["final_l1"] = l1_distance(tr.states.back().pmf, pstar);
  ctx.summary["clipped_mass"] = tr.total_clipped;
  ctx.summary["max_truncation_flux"] = tr.max_leak_rate;
}

void entropy_decay(Context& ctx) {
  const auto& c = ctx.cfg;
  FpOptions<double> opt;
  opt.t_end = c.t_end;
  opt.dt = c.dt;
  opt.sample_times = merged(uniform_times(c.t_end, 200), c.snapshot_times);
  opt.snapshot_times = c.snapshot_times;
  const auto tr = solve(gamma_initial(c.params), opt);

  CsvWriter ts(ctx.path("timeseries.csv"), kTimeseriesHeader);
  for (const auto& r : tr.rows) write_row(ts, r);
  write_snapshots(ctx, tr.snapshot_times, tr.snapshots);

  CsvWriter id(ctx.path("entropy_identity.csv"), {"t", "dH_dt", "dissipation", "rel_err"});
  double worst = 0, max_increase = -std::numeric_limits<double>::infinity(), mass_drift = 0, mean_drift = 0;
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    const auto& r = tr.rows[i];
    const double rel = std::abs(tr.entropy_rate[i] + r.dissipation) / r.dissipation;
    id.row({r.t, tr.entropy_rate[i], r.dissipation, rel});
    worst = std::max(worst, rel);
    if (i) max_increase = std::max(max_increase, r.entropy - tr.rows[i - 1].entropy);
    mass_drift = std::max(mass_drift, std::abs(r.mass - tr.rows[0].mass));
    mean_drift = std::max(mean_drift, std::abs(r.mean - c.params.mu));
  }
  ctx.summary["dt"] = tr.dt;
  ctx.summary["max_mass_drift"] = mass_drift;
  ctx.summary["max_mean_error"] = mean_drift;
  ctx.summary["max_entropy_increase"] = max_increase;
  ctx.summary["entropy_ratio_final"] = tr.rows.back().entropy / tr.rows.front().entropy;
  ctx.summary["max_entropy_identity_rel_err"] = worst;
  ctx.log << "H(t_end)/H(0) = " << tr.rows.back().entropy / tr.rows.front().entropy << "\n";
}

void quasi_invariant(Context& ctx) {
  const auto& c = ctx.cfg;
  const GridFunction<double> f0 = gamma_initial(c.params);
  FpOptions<double> fo;
  fo.t_end = c.t_end;
  fo.dt = c.dt;
  fo.snapshot_times = {c.t_end};
  fo.entropy_rate = false;
  const GridFunction<double> ref = solve(f0, fo).snapshots.back();

  const std::size_t legs = c.epsilon_list.size();
  std::vector<EpsTrajectory<double>> results(legs);
  std::vector<std::exception_ptr> errors(legs);
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(thread_cap(), static_cast<int>(legs)));
  auto work = [&] {
    for (std::size_t i; (i = next++) < legs;) {
      try {
        EpsOptions<double> eo;
        eo.eps = c.epsilon_list[i];
        eo.t_end = c.t_end;
        eo.snapshot_times = {c.t_end};
        eo.sample_times = {0, c.t_end};
        results[i] = run_scaled(f0, eo);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < workers; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  ctx.report.threads = workers;

  CsvWriter w(ctx.path("d2_vs_eps.csv"), {"eps", "d2", "l1", "ratio", "max_boundary_value"});
  json legs_json = json::array();
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < legs; ++i) {
    const auto& fe = results[i].snapshots.back();
    const double d2 = d2_fourier(fe, ref).value;
    const double ratio = prev / d2;
    w.row({c.epsilon_list[i], d2, l1(fe, ref), ratio, results[i].max_boundary_value});
    legs_json.push_back({{"eps", c.epsilon_list[i]}, {"d2", d2}, {"dt", results[i].dt},
                         {"boundary_growth", results[i].boundary_growth}});
    ctx.log << "eps " << c.epsilon_list[i] << ": d2 " << d2 << "\n";
    prev = d2;
  }
  ctx.summary["legs"] = legs_json;
}

void linear_decay(Context& ctx) {
  const auto& c = ctx.cfg;
  const double mu = c.params.mu;
  Rng rng(c.raw.seed);
  std::vector<Perturbation<double>> cases{laguerre_extremal(c.params)};
  for (int k = 0; k < 5; ++k) cases.push_back(random_perturbation(c.params, rng));
  const std::vector<double> samples = uniform_times(c.t_end, std::max(1, static_cast<int>(std::lround(c.t_end * 10))));

  CsvWriter w(ctx.path("linear_decay.csv"), {"case", "t", "energy", "bound"});
  json per_case = json::array();
  double worst = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto ds = decay_experiment(cases[k], c.t_end, samples, c.dt);
    const double e0 = ds.energy.front();
    double ratio = 0, sxx = 0, sxy = 0, sx = 0, sy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ds.t.size(); ++i) {
      const double bound = e0 * std::exp(-ds.t[i] / (6 * mu * mu));
      w.row({double(k), ds.t[i], ds.energy[i], bound});
      ratio = std::max(ratio, ds.energy[i] / bound);
      if (ds.t[i] >= c.t_end / 2 && ds.energy[i] > 0) {
        const double y = std::log(ds.energy[i]);
        sx += ds.t[i], sy += y, sxx += ds.t[i] * ds.t[i], sxy += ds.t[i] * y, ++n;
      }
    }
    const double rate = n > 1 ? -(n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
    worst = std::max(worst, ratio);
    per_case.push_back({{"case", k}, {"kind", k == 0 ? "extremal" : "random"}, {"max_ratio_to_bound", ratio},
                        {"fitted_rate", rate}, {"bound_rate", 1 / (6 * mu * mu)},
                        {"mass_drift", ds.max_mass_drift}, {"mean_drift", ds.max_mean_drift}});
  }
  ctx.summary["cases"] = per_case;
  ctx.summary["max_ratio_to_bound"] = worst;
}

void inequality_suite(Context& ctx) {
  const auto& c = ctx.cfg;
  const ModelParams<double>& p = c.params;
  const GridFunction<double> f_inf = boltzmann_gibbs(p);
  Rng rng(c.raw.seed);
  constexpr int kCases = 50;
  constexpr double kSlack = 1e-2;

  CsvWriter w(ctx.path("inequalities.csv"), {"family", "case", "lhs", "rhs", "holds"});
  int boundary_fail = 0, poincare_fail = 0, jb_fail = 0, l1_fail = 0;
  auto emit = [&](const char* fam, int k, double lhs, double rhs, bool ok) {
    w.row({fam, std::to_string(k), format_number(lhs), format_number(rhs), ok ? "1" : "0"});
  };
  for (int k = 0; k < kCases; ++k) {
    const auto r = random_perturbation(p, rng);
    const auto [b_lhs, b_rhs] = check_lemma_boundary(r);
    const bool b_ok = b_lhs <= b_rhs * (1 + kSlack);
    emit("boundary", k, b_lhs, b_rhs, b_ok);
    boundary_fail += !b_ok;

    const auto [p_lhs, p_rhs] = check_poincare(r);
    const bool p_ok = p_lhs <= p_rhs * (1 + kSlack);
    emit("poincare", k, p_lhs, p_rhs, p_ok);
    poincare_fail += !p_ok;

    // density near equilibrium: f = f_inf + eta r with f >= 0.2 f_inf
    const double eta = 0.8 / (r.values().array() / f_inf.values().array()).abs().maxCoeff();
    const GridFunction<double> f(p, f_inf.values() + eta * r.values());
    const double dh = hellinger(f, f_inf);
    const double fi = fisher(f, f_inf);
    const bool jb_ok = dh * dh <= fi * (1 + kSlack);
    emit("johnson_barron", k, dh * dh, fi, jb_ok);
    jb_fail += !jb_ok;

    const double dist = l1(f, f_inf);
    const bool l1_ok = dist <= 2 * dh * (1 + kSlack);
    emit("l1_hellinger", k, dist, 2 * dh, l1_ok);
    l1_fail += !l1_ok;
  }
  ctx.summary["cases"] = kCases;
  ctx.summary["violations"] = {{"boundary", boundary_fail}, {"poincare", poincare_fail},
                               {"johnson_barron", jb_fail}, {"l1_hellinger", l1_fail}};
}

void moment_odes(Context& ctx) {
  const auto& c = ctx.cfg;
  const ModelParams<double>& p = c.params;
  const GridFunction<double> f0 = gamma_initial(p);
  CsvWriter w(ctx.path("moment_odes.csv"), {"solver", "quantity", "t", "finite_difference", "formula", "rel_err"});

  // Fokker-Planck: one-sided three-point difference over 10-step spacing
  FpOptions<double> fo;
  fo.dt = c.dt;
  fo.t_end = 20 * c.dt;
  fo.sample_times = {0, 10 * c.dt, 20 * c.dt};
  fo.entropy_rate = false;
  const auto tr = solve(f0, fo);
  const MomentOdeReport rep = moment_ode_check(tr.rows, p.lambda);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  w.row({"fokker_planck", "dM2/dt", "0", format_number(rep.dm2_fd[0]), format_number(rep.dm2_formula[0]),
         format_number(rel(rep.dm2_fd[0], rep.dm2_formula[0]))});
  w.row({"fokker_planck", "dM3/dt", "0", format_number(rep.dm3_fd[0]), format_number(rep.dm3_formula[0]),
         format_number(rel(rep.dm3_fd[0], rep.dm3_formula[0]))});

  // epsilon-Boltzmann in kinetic time at rate lambda
  const double eps = c.epsilon_list.front();
  const double dt_eps = 0.02 / (p.lambda * (1 + mass(f0)));
  std::vector<DiagnosticsRow> rows;
  GridFunction<double> f = f0;
  EpsilonStepper<double> stepper(p, eps, p.lambda, dt_eps);
  for (int n = 0; n < 3; ++n) {
    DiagnosticsRow r;
    r.t = n * dt_eps;
    r.m2 = moment(f, 2);
    r.m3 = moment(f, 3);
    rows.push_back(r);
    stepper.advance(f);
  }
  std::vector<double> t{rows[0].t, rows[1].t, rows[2].t};
  std::vector<double> m2{rows[0].m2, rows[1].m2, rows[2].m2};
  std::vector<double> m3{rows[0].m3, rows[1].m3, rows[2].m3};
  const double fd2 = detail::three_point_derivative(t, m2, 0);
  const double fd3 = detail::three_point_derivative(t, m3, 0);
  const auto exact = epsilon_moment_rates(f0, eps, p.lambda);
  w.row({"epsilon_boltzmann", "dM2/dt", "0", format_number(fd2), format_number(exact.dm2),
         format_number(rel(fd2, exact.dm2))});
  w.row({"epsilon_boltzmann", "dM3/dt", "0", format_number(fd3), format_number(exact.dm3),
         format_number(rel(fd3, exact.dm3))});

  ctx.summary["fokker_planck"] = {{"dm2_rel_err", rel(rep.dm2_fd[0], rep.dm2_formula[0])},
                                  {"dm3_rel_err", rel(rep.dm3_fd[0], rep.dm3_formula[0])}};
  ctx.summary["epsilon_boltzmann"] = {{"epsilon", eps},
                                      {"dm2_rel_err", rel(fd2, exact.dm2)},
                                      {"dm3_rel_err", rel(fd3, exact.dm3)}};
}

json resolved_json(const ResolvedConfig& c) {
  return {{"experiment", c.raw.experiment},
          {"mu", c.params.mu},
          {"lambda", c.params.lambda},
          {"epsilon", c.params.epsilon},
          {"epsilon_list", c.epsilon_list},
          {"v_max", c.params.v_max},
          {"n_cells", c.params.n_cells},
          {"dt", c.dt},
          {"t_end", c.t_end},
          {"snapshot_times", c.snapshot_times},
          {"n_agents", c.n_agents},
          {"n_max", c.n_max},
          {"seed", c.raw.seed},
          {"out_dir", c.raw.out_dir}};
}

}  // namespace

RunReport run_experiment(const ResolvedConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{cfg, fs::path(cfg.raw.out_dir), log, {}};
  fs::create_directories(ctx.dir);

  const std::string& ex = cfg.raw.experiment;
  log << "running " << ex << "\n";
  if (ex == "agent-equilibrium") agent_equilibrium(ctx);
  else if (ex == "meanfield-entropy") meanfield_entropy(ctx);
  else if (ex == "entropy-decay") entropy_decay(ctx);
  else if (ex == "quasi-invariant") quasi_invariant(ctx);
  else if (ex == "linear-decay") linear_decay(ctx);
  else if (ex == "inequality-suite") inequality_suite(ctx);
  else if (ex == "moment-odes") moment_odes(ctx);
  else throw ConfigError("experiment", "unknown experiment '" + ex + "'");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"config", json::parse(cfg.raw.source_json)},
                   {"resolved", resolved_json(cfg)},
                   {"seed", cfg.raw.seed},
                   {"git_describe", BDY_GIT_DESCRIBE},
                   {"wall_time_s", wall},
                   {"threads", ctx.report.threads},
                   {"files", ctx.report.files},
                   {"summary", ctx.summary}};
  ctx.report.manifest_path = (ctx.dir / "manifest.json").string();
  std::ofstream(ctx.report.manifest_path) << manifest.dump(2) << "\n";
  return ctx.report;
}

}  // namespace bdy

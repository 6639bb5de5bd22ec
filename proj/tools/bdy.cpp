// bdy: run, validate and list the numerical experiments.

#include "bdy/config.hpp"
#include "bdy/experiments.hpp"
#include "bdy/model.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kAbort = 1;
constexpr int kConfig = 2;

int with_config(const std::string& path, bool run) {
  try {
    const bdy::ResolvedConfig cfg = bdy::resolve_config(bdy::load_config(path));
    if (!run) {
      const std::string& ex = cfg.raw.experiment;
      std::cout << "ok: " << ex << " (";
      if (ex == "agent-equilibrium") std::cout << "n_agents " << cfg.n_agents;
      else if (ex == "meanfield-entropy") std::cout << "n_max " << cfg.n_max;
      else std::cout << "n_cells " << cfg.params.n_cells << ", h " << cfg.params.h();
      std::cout << ", t_end " << cfg.t_end << ")\n";
      return kOk;
    }
    const bdy::RunReport rep = bdy::run_experiment(cfg, std::cerr);
    std::cout << rep.manifest_path << "\n";
    return kOk;
  } catch (const bdy::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: rejected configuration: " << e.what() << "\n";
    return kConfig;
  } catch (const bdy::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAbort;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the pairwise wealth-exchange model"};
  app.require_subcommand(1);

  std::string run_path, validate_path;
  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  run->add_option("config", run_path, "config file")->required();
  auto* validate = app.add_subcommand("validate", "check a JSON config without running it");
  validate->add_option("config", validate_path, "config file")->required();
  auto* list = app.add_subcommand("list-experiments", "print the experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*run) return with_config(run_path, true);
  if (*validate) return with_config(validate_path, false);
  if (*list) {
    for (const auto& name : bdy::experiment_names())
      std::cout << name << "\t" << bdy::experiment_summary(name) << "\n";
  }
  return kOk;
}

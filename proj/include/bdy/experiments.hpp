#pragma once

#include "bdy/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace bdy {

/// BDY_THREADS if set to a positive integer, else the hardware thread count.
int thread_cap();

struct RunReport {
  std::vector<std::string> files;  ///< written outputs, relative to out_dir
  std::string manifest_path;
  int threads = 1;
};

/// Runs the named experiment and writes its outputs plus manifest.json into
/// out_dir. Progress lines go to `log`. Throws NumericalAbort on solver
/// blowup and ConfigError on rejected parameters.
RunReport run_experiment(const ResolvedConfig& cfg, std::ostream& log);

/// One-line description per experiment, for `bdy list-experiments`.
std::string experiment_summary(const std::string& name);

}  // namespace bdy

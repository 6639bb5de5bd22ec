#pragma once

#include "bdy/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdy {

/// Rejected configuration; key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

const std::vector<std::string>& experiment_names();

/// Parsed run configuration. Unset optionals take per-experiment defaults.
struct RunConfig {
  std::string experiment;
  double mu = 1;
  double lambda = 2;
  std::optional<double> epsilon;
  std::vector<double> epsilon_list;
  std::optional<double> v_max;
  std::optional<int> n_cells;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::vector<double> snapshot_times;
  std::optional<int> n_agents;
  std::optional<int> n_max;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::string source_json;  ///< normalized echo for the manifest
};

/// Parses a flat JSON object. Throws ConfigError on unknown keys or bad values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Configuration with every per-experiment default filled in.
struct ResolvedConfig {
  RunConfig raw;
  ModelParams<double> params;
  double dt = 0;
  double t_end = 0;
  std::vector<double> epsilon_list;
  std::vector<double> snapshot_times;
  int n_agents = 0;
  int n_max = 0;
};

/// Fills defaults and runs the structural and numerical checks (grid
/// alignment, step limits). Throws ConfigError.
ResolvedConfig resolve_config(const RunConfig& cfg);

}  // namespace bdy

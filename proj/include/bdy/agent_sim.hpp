#pragma once

// Event-driven Monte Carlo for the pairwise exchange process. Events arrive at
// total rate lambda N / 2; each picks an ordered pair (i, j), i != j, and moves
// one quantum from i to j unless i holds less than a quantum. Void events still
// advance the clock.

#include "bdy/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace bdy {

using Rng = std::mt19937_64;

enum class InitMode { equal, multinomial };

struct ParticleEnsemble {
  std::vector<double> wealths;
  double time = 0;
  double total_wealth = 0;  ///< exact initial total, n_agents * mu

  std::size_t size() const { return wealths.size(); }
};

/// Wealth is placed on the lattice quantum * {0, 1, ...}. `equal` needs mu/quantum
/// integral, `multinomial` needs n_agents * mu / quantum integral; otherwise
/// std::invalid_argument.
ParticleEnsemble init_ensemble(int n_agents, double mu, InitMode mode, std::uint64_t seed, double quantum = 1.0);

/// Moves `amount` from i to j if wealths[i] >= amount (relative slack 1e-9). Returns whether it moved.
bool apply_exchange(ParticleEnsemble& e, std::size_t i, std::size_t j, double amount = 1.0);

/// One event of the unit-quantum process at interaction rate lambda.
void step_discrete(ParticleEnsemble& e, Rng& rng, double lambda = 2.0);

/// One event of the eps-quantum process at interaction rate `rate`
/// (pass lambda / eps^2 for the high-frequency scaling).
void step_epsilon(ParticleEnsemble& e, double eps, Rng& rng, double rate = 2.0);

/// Steps until the next event would pass t_end, then sets time = t_end. Returns the event count.
long long run_discrete_until(ParticleEnsemble& e, double t_end, Rng& rng, double lambda = 2.0);
long long run_epsilon_until(ParticleEnsemble& e, double t_end, double eps, Rng& rng, double rate = 2.0);

/// Neumaier-compensated sum of the wealths.
double compensated_total(const ParticleEnsemble& e);

/// Histogram of wealth / quantum on {0..max}; entries are counts / N.
Pmf<double> empirical_pmf(const ParticleEnsemble& e, double quantum = 1.0);

/// Histogram density on the grid of params; wealth beyond v_max is counted in the last cell.
GridFunction<double> empirical_density(const ParticleEnsemble& e, const ModelParams<double>& params);

}  // namespace bdy

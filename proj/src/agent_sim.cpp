#include "bdy/agent_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdy {

namespace {

bool is_integral(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

// Ordered pair with i != j, uniform over N (N - 1) choices.
std::pair<std::size_t, std::size_t> draw_pair(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  const std::size_t i = first(rng);
  std::size_t j = second(rng);
  if (j >= i) ++j;
  return {i, j};
}

}  // namespace

ParticleEnsemble init_ensemble(int n_agents, double mu, InitMode mode, std::uint64_t seed, double quantum) {
  if (n_agents < 2) throw std::invalid_argument("n_agents must be at least 2");
  if (!(mu > 0)) throw std::invalid_argument("mu must be positive");
  if (!(quantum > 0)) throw std::invalid_argument("quantum must be positive");

  ParticleEnsemble e;
  e.wealths.assign(n_agents, 0.0);
  if (mode == InitMode::equal) {
    if (!is_integral(mu / quantum)) throw std::invalid_argument("equal start needs mu to be a whole number of quanta");
    const double units = std::round(mu / quantum);
    std::fill(e.wealths.begin(), e.wealths.end(), units * quantum);
    e.total_wealth = units * quantum * n_agents;
  } else {
    const double coins = mu * n_agents / quantum;
    if (!is_integral(coins)) throw std::invalid_argument("multinomial start needs n_agents * mu to be a whole number of quanta");
    const auto n_coins = static_cast<long long>(std::llround(coins));
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, n_agents - 1);
    std::vector<long long> counts(n_agents, 0);
    for (long long c = 0; c < n_coins; ++c) ++counts[pick(rng)];
    for (int i = 0; i < n_agents; ++i) e.wealths[i] = static_cast<double>(counts[i]) * quantum;
    e.total_wealth = static_cast<double>(n_coins) * quantum;
  }
  return e;
}

bool apply_exchange(ParticleEnsemble& e, std::size_t i, std::size_t j, double amount) {
  if (i == j || i >= e.size() || j >= e.size()) throw std::invalid_argument("exchange needs two distinct agents");
  double& giver = e.wealths[i];
  if (giver < amount * (1 - 1e-9)) return false;
  // rounding can leave a lattice wealth a hair below the quantum
  const double moved = std::min(amount, giver);
  giver -= moved;
  e.wealths[j] += moved;
  return true;
}

void step_discrete(ParticleEnsemble& e, Rng& rng, double lambda) {
  step_epsilon(e, 1.0, rng, lambda);
}

void step_epsilon(ParticleEnsemble& e, double eps, Rng& rng, double rate) {
  const std::size_t n = e.size();
  std::exponential_distribution<double> wait(rate * static_cast<double>(n) / 2);
  e.time += wait(rng);
  const auto [i, j] = draw_pair(n, rng);
  apply_exchange(e, i, j, eps);
}

long long run_epsilon_until(ParticleEnsemble& e, double t_end, double eps, Rng& rng, double rate) {
  const std::size_t n = e.size();
  if (n < 2) throw std::invalid_argument("ensemble needs at least two agents");
  if (!(rate > 0) || !(eps > 0)) throw std::invalid_argument("rate and quantum must be positive");
  std::exponential_distribution<double> wait(rate * static_cast<double>(n) / 2);
  long long events = 0;
  for (;;) {
    const double next = e.time + wait(rng);
    if (next > t_end) break;
    e.time = next;
    const auto [i, j] = draw_pair(n, rng);
    apply_exchange(e, i, j, eps);
    ++events;
  }
  // memoryless clock: discarding the overshooting wait is exact
  e.time = std::max(e.time, t_end);
  return events;
}

long long run_discrete_until(ParticleEnsemble& e, double t_end, Rng& rng, double lambda) {
  return run_epsilon_until(e, t_end, 1.0, rng, lambda);
}

double compensated_total(const ParticleEnsemble& e) {
  double sum = 0, comp = 0;
  for (const double w : e.wealths) {
    const double t = sum + w;
    comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
  }
  return sum + comp;
}

Pmf<double> empirical_pmf(const ParticleEnsemble& e, double quantum) {
  if (e.size() == 0) throw std::invalid_argument("empty ensemble");
  std::vector<long long> idx(e.size());
  long long top = 0;
  for (std::size_t a = 0; a < e.size(); ++a) {
    idx[a] = std::llround(e.wealths[a] / quantum);
    top = std::max(top, idx[a]);
  }
  Vector<double> p = Vector<double>::Zero(top + 1);
  for (const long long k : idx) p[k] += 1;
  p /= static_cast<double>(e.size());
  return Pmf<double>(std::move(p));
}

GridFunction<double> empirical_density(const ParticleEnsemble& e, const ModelParams<double>& params) {
  if (e.size() == 0) throw std::invalid_argument("empty ensemble");
  GridFunction<double> g(params);
  const double h = params.h();
  const Eigen::Index last = g.size() - 1;
  for (const double w : e.wealths) {
    // lattice wealths sit on cell edges; nudge them into the cell above
    const auto j = static_cast<Eigen::Index>(std::floor(w / h + 1e-9));
    g.values()[std::clamp<Eigen::Index>(j, 0, last)] += 1;
  }
  g.values() /= static_cast<double>(e.size()) * h;
  return g;
}

}  // namespace bdy

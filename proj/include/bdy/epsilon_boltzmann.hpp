#pragma once

// Explicit solver for the epsilon-exchange kinetic equation
//   d_t f = (lambda/2) [ f(v+eps) - r f(v) + (r f(v-eps) - f(v)) 1{v >= eps} ],
//   r[f] = int_eps^inf f,
// on a grid with eps = k h, so both shifts are exact index shifts.

#include "bdy/boundary.hpp"
#include "bdy/diagnostics.hpp"
#include "bdy/fokker_planck.hpp"
#include "bdy/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bdy {

/// k with eps = k h; throws std::invalid_argument if eps is not grid aligned.
template <typename Scalar>
Eigen::Index grid_shift(const ModelParams<Scalar>& p, Scalar eps) {
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  const Scalar ratio = eps / p.h();
  const Scalar k = std::round(ratio);
  if (k < 1 || std::abs(ratio - k) > Scalar(1e-9) * std::max(Scalar(1), ratio))
    throw std::invalid_argument("epsilon must be a positive integer multiple of the cell width");
  return static_cast<Eigen::Index>(k);
}

/// h sum_{v_j >= eps} v_j^n f_j; zero once eps reaches v_max.
template <typename Scalar>
Scalar rich_moment(const GridFunction<Scalar>& f, Scalar eps, int n) {
  if (eps >= f.params().v_max) return 0;
  const Eigen::Index k = grid_shift(f.params(), eps);
  const auto v = f.centers();
  const Eigen::Index m = f.size() - k;
  return f.h() * (v.tail(m).pow(static_cast<Scalar>(n)) * f.values().tail(m).array()).sum();
}

/// Fraction of agents able to give: r[f] = h sum_{v_j >= eps} f_j.
template <typename Scalar>
Scalar r_of_f(const GridFunction<Scalar>& f, Scalar eps) {
  if (eps >= f.params().v_max) return 0;
  const Eigen::Index k = grid_shift(f.params(), eps);
  return f.h() * f.values().tail(f.size() - k).sum();
}

template <typename Scalar>
struct MomentRates {
  Scalar dm2 = 0;
  Scalar dm3 = 0;
};

/// Exact moment rates of the semi-discrete operator, up to top truncation:
///   dM2/dt = lambda [eps^2 r + eps (mu r - r1)]
///   dM3/dt = (3 lambda eps / 2) [r M2 - r2 + eps (r1 + r mu)]
/// with r_n = int_eps^inf v^n f and mu the first moment.
template <typename Scalar>
MomentRates<Scalar> epsilon_moment_rates(const GridFunction<Scalar>& f, Scalar eps, Scalar lambda) {
  const Scalar r = r_of_f(f, eps);
  const Scalar r1 = rich_moment(f, eps, 1);
  const Scalar r2 = rich_moment(f, eps, 2);
  const Scalar mu = mean(f);
  const Scalar m2 = moment(f, 2);
  MomentRates<Scalar> out;
  out.dm2 = lambda * (eps * eps * r + eps * (mu * r - r1));
  out.dm3 = lambda * 3 * eps / 2 * (r * m2 - r2 + eps * (r1 + r * mu));
  return out;
}

/// Mass lost per unit time through v_max: receivers in the top k cells.
template <typename Scalar>
Scalar truncation_outflow(const GridFunction<Scalar>& f, Scalar eps, Scalar lambda) {
  const Eigen::Index k = grid_shift(f.params(), eps);
  return lambda / 2 * r_of_f(f, eps) * f.h() * f.values().tail(std::min(k, f.size())).sum();
}

template <typename Scalar>
class EpsilonStepper {
 public:
  /// rate is the interaction rate entering the operator (lambda, or lambda/eps^2 when scaled).
  EpsilonStepper(const ModelParams<Scalar>& p, Scalar eps, Scalar rate, Scalar dt)
      : k_(grid_shift(p, eps)), rate_(rate), dt_(dt) {
    if (k_ >= p.n_cells) throw std::invalid_argument("epsilon must be smaller than v_max");
    if (!(rate > 0) || !(dt > 0)) throw std::invalid_argument("rate and dt must be positive");
  }

  Scalar last_r() const { return last_r_; }

  void advance(GridFunction<Scalar>& f) {
    auto& u = f.values();
    const Eigen::Index n = u.size();
    const Eigen::Index m = n - k_;
    const Scalar r = f.h() * u.tail(m).sum();
    if (!(dt_ * rate_ * (1 + r) < 1))
      throw std::invalid_argument("epsilon-boltzmann: dt violates dt * lambda * (1 + r) < 1");
    last_r_ = r;

    gain_ = -r * u;
    gain_.head(m) += u.tail(m);
    gain_.tail(m) += r * u.head(m) - u.tail(m);
    u += (dt_ * rate_ / 2) * gain_;
  }

 private:
  Eigen::Index k_;
  Scalar rate_;
  Scalar dt_;
  Scalar last_r_ = 0;
  Vector<Scalar> gain_;
};

/// One explicit Euler step at interaction rate lambda.
template <typename Scalar>
GridFunction<Scalar> step_epsilon_pde(const GridFunction<Scalar>& f, Scalar eps, Scalar lambda, Scalar dt) {
  EpsilonStepper<Scalar> stepper(f.params(), eps, lambda, dt);
  GridFunction<Scalar> out = f;
  stepper.advance(out);
  return out;
}

template <typename Scalar = double>
struct EpsOptions {
  Scalar eps = 0.1;
  Scalar t_end = 1;
  Scalar dt = 0;       ///< 0: 0.2 / (rate (1 + mass)), shrunk so t_end is a whole number of steps
  bool scaled = true;  ///< rate lambda/eps^2 (physical time) instead of lambda (kinetic time)
  std::vector<Scalar> sample_times;
  std::vector<Scalar> snapshot_times;
  Scalar growth_factor = 2;  ///< boundary-value growth flag threshold
};

template <typename Scalar = double>
struct EpsTrajectory {
  Scalar dt = 0;
  long long steps = 0;
  std::vector<DiagnosticsRow> rows;
  std::vector<Scalar> snapshot_times;
  std::vector<GridFunction<Scalar>> snapshots;
  Scalar max_boundary_value = 0;
  /// Set when f(0,t) exceeded growth_factor * max(f0(0), 1/mu) at a sample.
  bool boundary_growth = false;
};

template <typename Scalar>
EpsTrajectory<Scalar> run_scaled(const GridFunction<Scalar>& f0, const EpsOptions<Scalar>& opt) {
  const ModelParams<Scalar>& p = f0.params();
  const Scalar rate = opt.scaled ? p.lambda / (opt.eps * opt.eps) : p.lambda;
  EpsTrajectory<Scalar> out;
  if (opt.dt > 0) {
    out.dt = opt.dt;
  } else {
    const Scalar dt0 = Scalar(0.2) / (rate * (1 + mass(f0)));
    const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(opt.t_end / dt0)));
    out.dt = opt.t_end / static_cast<Scalar>(n);
  }
  EpsilonStepper<Scalar> stepper(p, opt.eps, rate, out.dt);

  const long long n_end = std::llround(opt.t_end / out.dt);
  out.steps = n_end;
  const auto sample_idx = detail::step_indices(opt.sample_times, out.dt, opt.t_end);
  const auto snap_idx = detail::step_indices(opt.snapshot_times, out.dt, opt.t_end);
  std::vector<char> is_sample(n_end + 1, 0), is_snap(n_end + 1, 0);
  for (auto i : sample_idx) is_sample[std::min(i, n_end)] = 1;
  for (auto i : snap_idx) is_snap[std::min(i, n_end)] = 1;

  const GridFunction<Scalar> f_inf = boltzmann_gibbs(p);
  const Scalar growth_limit = opt.growth_factor * std::max(boundary_value(f0), Scalar(1) / p.mu);

  GridFunction<Scalar> f = f0;
  for (long long n = 0; n <= n_end; ++n) {
    const Scalar t = static_cast<Scalar>(n) * out.dt;
    if (is_sample[n]) {
      detail::check_state(f, t, "epsilon-boltzmann", Scalar(1e-14));
      out.rows.push_back(diagnose(f, f_inf, t));
      const Scalar b = static_cast<Scalar>(out.rows.back().boundary_value);
      out.max_boundary_value = std::max(out.max_boundary_value, b);
      if (b > growth_limit) out.boundary_growth = true;
    }
    if (is_snap[n]) {
      out.snapshot_times.push_back(t);
      out.snapshots.push_back(f);
    }
    if (n < n_end) stepper.advance(f);
  }
  detail::check_state(f, static_cast<Scalar>(n_end) * out.dt, "epsilon-boltzmann", Scalar(1e-14));
  return out;
}

}  // namespace bdy

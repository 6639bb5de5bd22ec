#pragma once

// Conservative finite-volume solver for
//   d_t f = (lambda/2) d_v [ d_v f + f(0,t) f ],   zero flux at v = 0 and v = v_max.
//
// Interface fluxes use the exponentially fitted (Scharfetter-Gummel) form
//   F_{j+1/2} = (D/h) [ B(-x) f_{j+1} - B(x) f_j ],  B(x) = x/(e^x - 1),  x = b h,
// with D = lambda/2. The drift b is chosen each step so that the discrete first
// moment has zero rate; it is a second-order estimate of f(0,t). Cell averages
// of any exponential with rate b are then exact steady states, mass and mean
// are conserved to rounding, and positivity holds whenever the diagonal
// coefficient of the update is non-negative.

#include "bdy/boundary.hpp"
#include "bdy/diagnostics.hpp"
#include "bdy/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bdy {

/// x / (e^x - 1), continuous at 0.
template <typename Scalar>
Scalar bernoulli_fn(Scalar x) {
  if (std::abs(x) < Scalar(1e-6)) return 1 - x / 2 + x * x / 12;
  return x / std::expm1(x);
}

namespace detail {

// Drift coefficient from the raw sum S = sum f_j and the two end cells.
template <typename Scalar>
Scalar fitted_drift(Scalar sum, Scalar first, Scalar last, Scalar h) {
  const Scalar lower = sum - first;
  const Scalar upper = sum - last;
  if (!(lower > 0) || !(upper > 0))
    throw NumericalAbort("fokker-planck: drift undefined (mass concentrated in one end cell)");
  return std::log(upper / lower) / h;
}

}  // namespace detail

/// Drift coefficient b[f] used by the flux; approximates f(0,t).
template <typename Scalar>
Scalar fitted_drift(const GridFunction<Scalar>& f) {
  const auto& u = f.values();
  return detail::fitted_drift(u.sum(), u[0], u[u.size() - 1], f.h());
}

/// Largest dt keeping the update coefficients of f non-negative.
template <typename Scalar>
Scalar max_stable_dt(const GridFunction<Scalar>& f, Scalar lambda) {
  const Scalar h = f.h();
  const Scalar D = lambda / 2;
  const Scalar x = fitted_drift(f) * h;
  // B(x) + B(-x) = x coth(x/2), which is >= 2
  const Scalar diag = bernoulli_fn(x) + bernoulli_fn(-x);
  return std::min(h * h / (D * diag), h * h / (2 * D));
}

/// Reusable stepper; keeps the flux buffer between steps.
template <typename Scalar>
class FokkerPlanckStepper {
 public:
  FokkerPlanckStepper(Scalar lambda, Scalar dt) : lambda_(lambda), dt_(dt) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  }

  Scalar dt() const { return dt_; }

  /// Drift coefficient used by the last step.
  Scalar last_drift() const { return last_drift_; }

  /// Throws std::invalid_argument when dt exceeds the diffusion limit for h.
  void check_diffusion_limit(Scalar h) const {
    if (lambda_ / 2 * dt_ / (h * h) > Scalar(0.5))
      throw std::invalid_argument("fokker-planck: dt violates the diffusion limit (lambda/2) dt/h^2 <= 1/2");
  }

  void advance(GridFunction<Scalar>& f) {
    const Scalar h = f.h();
    auto& u = f.values();
    const Eigen::Index n = u.size();
    const Scalar D = lambda_ / 2;

    const Scalar b = detail::fitted_drift(u.sum(), u[0], u[n - 1], h);
    const Scalar x = b * h;
    const Scalar up = D / h * bernoulli_fn(-x);
    const Scalar down = D / h * bernoulli_fn(x);
    const Scalar k = dt_ / h;
    if (k * (up + down) > 1)
      throw std::invalid_argument("fokker-planck: dt violates positivity of the fitted scheme");
    last_drift_ = b;

    flux_.resize(n + 1);
    flux_[0] = 0;
    flux_[n] = 0;
    flux_.segment(1, n - 1) = up * u.tail(n - 1) - down * u.head(n - 1);
    u += k * (flux_.tail(n) - flux_.head(n));
  }

 private:
  Scalar lambda_;
  Scalar dt_;
  Scalar last_drift_ = 0;
  Vector<Scalar> flux_;
};

/// One explicit step. Throws std::invalid_argument on CFL violation.
template <typename Scalar>
GridFunction<Scalar> step_fp(const GridFunction<Scalar>& f, Scalar lambda, Scalar dt) {
  FokkerPlanckStepper<Scalar> stepper(lambda, dt);
  stepper.check_diffusion_limit(f.h());
  GridFunction<Scalar> out = f;
  stepper.advance(out);
  return out;
}

/// Default dt: diffusion number (lambda/2) dt / h^2 = 0.4.
template <typename Scalar>
Scalar default_fp_dt(const ModelParams<Scalar>& p) {
  return Scalar(0.8) * p.h() * p.h() / p.lambda;
}

template <typename Scalar = double>
struct FpOptions {
  Scalar t_end = 1;
  Scalar dt = 0;                        ///< 0 selects default_fp_dt
  std::vector<Scalar> sample_times;     ///< diagnostics rows
  std::vector<Scalar> snapshot_times;   ///< full grid functions
  bool entropy_rate = true;             ///< one-step forward difference of H at each sample
};

template <typename Scalar = double>
struct FpTrajectory {
  Scalar dt = 0;
  long long steps = 0;
  std::vector<DiagnosticsRow> rows;
  /// (H(t + dt) - H(t)) / dt at each row; empty unless requested.
  std::vector<double> entropy_rate;
  std::vector<Scalar> snapshot_times;
  std::vector<GridFunction<Scalar>> snapshots;
};

namespace detail {

template <typename Scalar>
std::vector<long long> step_indices(const std::vector<Scalar>& times, Scalar dt, Scalar t_end) {
  std::vector<long long> idx;
  idx.reserve(times.size());
  for (const Scalar t : times) {
    if (t < 0 || t > t_end * (1 + Scalar(1e-12)))
      throw std::invalid_argument("requested time outside [0, t_end]");
    idx.push_back(std::llround(t / dt));
  }
  return idx;
}

template <typename Scalar>
void check_state(const GridFunction<Scalar>& f, Scalar t, const char* solver, Scalar negative_tol) {
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    const Scalar v = f[j];
    if (!std::isfinite(static_cast<double>(v)) || v < -negative_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << solver << ": blowup at t=" << t << ", cell " << j << " (v=" << f.center(j)
          << "), value " << v << ", mass " << mass(f);
      throw NumericalAbort(msg.str());
    }
  }
}

}  // namespace detail

/// Integrates to t_end with a fixed dt, recording diagnostics and snapshots.
///
/// Requested times are rounded to the nearest step. Throws NumericalAbort on
/// NaN or loss of positivity, std::invalid_argument on CFL violation.
template <typename Scalar>
FpTrajectory<Scalar> solve(const GridFunction<Scalar>& f0, const FpOptions<Scalar>& opt) {
  const ModelParams<Scalar>& p = f0.params();
  FpTrajectory<Scalar> out;
  out.dt = opt.dt > 0 ? opt.dt : default_fp_dt(p);
  FokkerPlanckStepper<Scalar> stepper(p.lambda, out.dt);
  stepper.check_diffusion_limit(p.h());

  const long long n_end = std::llround(opt.t_end / out.dt);
  out.steps = n_end;
  const auto sample_idx = detail::step_indices(opt.sample_times, out.dt, opt.t_end);
  const auto snap_idx = detail::step_indices(opt.snapshot_times, out.dt, opt.t_end);
  const GridFunction<Scalar> f_inf = boltzmann_gibbs(p);

  std::vector<char> is_sample(n_end + 1, 0), is_snap(n_end + 1, 0);
  for (auto i : sample_idx) is_sample[std::min(i, n_end)] = 1;
  for (auto i : snap_idx) is_snap[std::min(i, n_end)] = 1;

  GridFunction<Scalar> f = f0;
  bool rate_pending = false;
  Scalar h_prev = 0;
  for (long long n = 0;; ++n) {
    const Scalar t = static_cast<Scalar>(n) * out.dt;
    if (rate_pending) {
      out.entropy_rate.push_back(static_cast<double>((relative_entropy(f, f_inf) - h_prev) / out.dt));
      rate_pending = false;
    }
    if (n > n_end) break;
    if (is_sample[n]) {
      detail::check_state(f, t, "fokker-planck", Scalar(1e-12));
      out.rows.push_back(diagnose(f, f_inf, t));
      if (opt.entropy_rate) {
        h_prev = static_cast<Scalar>(out.rows.back().entropy);
        rate_pending = true;
      }
    }
    if (is_snap[n]) {
      out.snapshot_times.push_back(t);
      out.snapshots.push_back(f);
    }
    if (n == n_end && !rate_pending) break;
    stepper.advance(f);
  }
  return out;
}

/// Comparison of finite-difference moment rates with the closed-form moment ODEs
///   dM2/dt = lambda (M0 - M1 f(0)),  dM3/dt = lambda (3 M1 - (3/2) f(0) M2),
/// which for unit mass and mean mu are lambda (1 - mu f(0)) and lambda (3 mu - (3/2) f(0) M2).
struct MomentOdeReport {
  std::vector<double> t;
  std::vector<double> dm2_fd, dm2_formula;
  std::vector<double> dm3_fd, dm3_formula;
  double max_rel_m2 = 0;
  double max_rel_m3 = 0;
};

namespace detail {

// Three-point derivative at x[i] on a non-uniform grid.
inline double three_point_derivative(const std::vector<double>& x, const std::vector<double>& y, std::size_t i) {
  std::size_t a, b, c;
  if (i == 0) {
    a = 0, b = 1, c = 2;
  } else if (i + 1 == x.size()) {
    a = i - 2, b = i - 1, c = i;
  } else {
    a = i - 1, b = i, c = i + 1;
  }
  const double x0 = x[a], x1 = x[b], x2 = x[c], xi = x[i];
  // derivative of the Lagrange interpolant
  const double l0 = (2 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (2 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (2 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
  return l0 * y[a] + l1 * y[b] + l2 * y[c];
}

}  // namespace detail

/// Relative errors use max(|formula|, scale) as denominator.
inline MomentOdeReport moment_ode_check(const std::vector<DiagnosticsRow>& rows, double lambda,
                                        double scale = 1e-3) {
  if (rows.size() < 3) throw std::invalid_argument("moment_ode_check needs at least three samples");
  MomentOdeReport rep;
  std::vector<double> m2, m3;
  for (const auto& r : rows) {
    rep.t.push_back(r.t);
    m2.push_back(r.m2);
    m3.push_back(r.m3);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    rep.dm2_fd.push_back(detail::three_point_derivative(rep.t, m2, i));
    rep.dm3_fd.push_back(detail::three_point_derivative(rep.t, m3, i));
    rep.dm2_formula.push_back(lambda * (r.mass - r.mean * r.boundary_value));
    rep.dm3_formula.push_back(lambda * (3 * r.mean - 1.5 * r.boundary_value * r.m2));
    rep.max_rel_m2 = std::max(rep.max_rel_m2, std::abs(rep.dm2_fd[i] - rep.dm2_formula[i]) /
                                                  std::max(std::abs(rep.dm2_formula[i]), scale));
    rep.max_rel_m3 = std::max(rep.max_rel_m3, std::abs(rep.dm3_fd[i] - rep.dm3_formula[i]) /
                                                  std::max(std::abs(rep.dm3_formula[i]), scale));
  }
  return rep;
}

}  // namespace bdy

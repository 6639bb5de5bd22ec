#pragma once

// Linearization around f_inf: f = f_inf + r with int r = int v r = 0 and
//   d_t r = D d_v [ d_v r + f_inf(0) r + r(0,t) f_inf ],  D = lambda/2,
// whose zero boundary flux is the Robin condition d_v r + 2 f_inf(0) r = 0.
//
// The flux at interior interfaces is
//   G_{j+1/2} = (r_{j+1} - r_j)/h + c (r_j + r_{j+1})/2 + rho (f_j + f_{j+1})/2,  c = 1/mu,
// and zero at both ends. rho stands in for r(0,t): it is the value that gives
// the discrete first moment zero rate, so both constraints are preserved to
// rounding. It differs from the extrapolated r(0) by O(h^2).

#include "bdy/boundary.hpp"
#include "bdy/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bdy {

/// Signed cell averages of r; shares the grid type with densities.
template <typename Scalar = double>
using Perturbation = GridFunction<Scalar>;

/// Grid for linearized runs: v_max = 25 mu keeps the weight e^{v/mu} in range.
template <typename Scalar = double>
ModelParams<Scalar> linear_params(Scalar mu, Scalar h, Scalar lambda = 2) {
  return default_params<Scalar>(mu, h, lambda, Scalar(0.1) * mu, Scalar(25));
}

/// 1/f_inf(v_j) at cell centers.
template <typename Scalar>
Vector<Scalar> inverse_equilibrium_weight(const ModelParams<Scalar>& p) {
  const GridFunction<Scalar> probe(p);
  return (p.mu * (probe.centers() / p.mu).exp()).matrix();
}

/// (h sum r, h sum v r).
template <typename Scalar>
std::pair<Scalar, Scalar> constraint_moments(const Perturbation<Scalar>& r) {
  return {mass(r), moment(r, 1)};
}

/// Removes the component along span{f_inf, v f_inf} so both discrete moments vanish.
template <typename Scalar>
Perturbation<Scalar> project_constraints(const Perturbation<Scalar>& r) {
  const ModelParams<Scalar>& p = r.params();
  const GridFunction<Scalar> f_inf = boltzmann_gibbs(p);
  const auto v = r.centers();
  const Vector<Scalar> phi0 = f_inf.values();
  const Vector<Scalar> phi1 = (v * f_inf.values().array()).matrix();
  const Scalar h = p.h();

  Eigen::Matrix<Scalar, 2, 2> A;
  A << h * phi0.sum(), h * phi1.sum(),
       h * (v * phi0.array()).sum(), h * (v * phi1.array()).sum();
  Eigen::Matrix<Scalar, 2, 1> rhs(mass(r), moment(r, 1));
  const Eigen::Matrix<Scalar, 2, 1> coef = A.partialPivLu().solve(rhs);

  Perturbation<Scalar> out = r;
  out.values() -= coef[0] * phi0 + coef[1] * phi1;
  return out;
}

template <typename Scalar>
class LinearStepper {
 public:
  LinearStepper(const ModelParams<Scalar>& p, Scalar dt)
      : f_inf_(boltzmann_gibbs(p)), dt_(dt), D_(p.lambda / 2) {
    const Scalar h = p.h();
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
    if (D_ * dt / (h * h) > Scalar(0.4))
      throw std::invalid_argument("linearized: dt violates (lambda/2) dt / h^2 <= 0.4");
    const auto& f = f_inf_.values();
    denom_ = mass(f_inf_) - h * (f[0] + f[f.size() - 1]) / 2;
  }

  /// Value standing in for r(0,t) at the last step.
  Scalar last_rho() const { return rho_; }

  Scalar forcing_value(const Perturbation<Scalar>& r) const {
    const Scalar h = r.h();
    const Scalar c = 1 / r.params().mu;
    const auto& u = r.values();
    const Eigen::Index n = u.size();
    return (u[0] - u[n - 1] - c * (h * u.sum() - h * (u[0] + u[n - 1]) / 2)) / denom_;
  }

  void advance(Perturbation<Scalar>& r) {
    const Scalar h = r.h();
    const Scalar c = 1 / r.params().mu;
    auto& u = r.values();
    const auto& f = f_inf_.values();
    const Eigen::Index n = u.size();
    rho_ = forcing_value(r);

    flux_.resize(n + 1);
    flux_[0] = 0;
    flux_[n] = 0;
    flux_.segment(1, n - 1) = (u.tail(n - 1) - u.head(n - 1)) / h +
                              (c / 2) * (u.head(n - 1) + u.tail(n - 1)) +
                              (rho_ / 2) * (f.head(n - 1) + f.tail(n - 1));
    u += (dt_ * D_ / h) * (flux_.tail(n) - flux_.head(n));
  }

 private:
  GridFunction<Scalar> f_inf_;
  Scalar dt_;
  Scalar D_;
  Scalar denom_ = 1;
  Scalar rho_ = 0;
  Vector<Scalar> flux_;
};

template <typename Scalar>
Perturbation<Scalar> step_linear(const Perturbation<Scalar>& r, Scalar dt) {
  LinearStepper<Scalar> stepper(r.params(), dt);
  Perturbation<Scalar> out = r;
  stepper.advance(out);
  return out;
}

/// E[r] = (1/2) h sum r_j^2 / f_inf(v_j).
template <typename Scalar>
Scalar energy(const Perturbation<Scalar>& r) {
  const Vector<Scalar> w = inverse_equilibrium_weight(r.params());
  return r.h() * (r.values().array().square() * w.array()).sum() / 2;
}

/// h sum |r'_j|^2 / f_inf(v_j) with centered differences.
template <typename Scalar>
Scalar weighted_dirichlet(const Perturbation<Scalar>& r) {
  const Vector<Scalar> w = inverse_equilibrium_weight(r.params());
  const Vector<Scalar> dr = cell_derivative(r.values(), r.h());
  return r.h() * (dr.array().square() * w.array()).sum();
}

/// D (2 r(0)^2 - int |r'|^2 / f_inf), the energy rate predicted by integration by parts.
template <typename Scalar>
Scalar energy_rate_identity(const Perturbation<Scalar>& r) {
  const Scalar r0 = extrapolate_to_origin<Scalar>(r.values());
  return r.params().lambda / 2 * (2 * r0 * r0 - weighted_dirichlet(r));
}

namespace detail {

template <typename Scalar>
void require_constrained(const Perturbation<Scalar>& r, Scalar rel_tol) {
  const Scalar scale = r.h() * r.values().cwiseAbs().sum() * std::max(Scalar(1), r.params().mu);
  const auto [m0, m1] = constraint_moments(r);
  if (std::abs(m0) > rel_tol * scale || std::abs(m1) > rel_tol * scale)
    throw std::invalid_argument("perturbation violates the zero mass / zero mean constraints");
}

}  // namespace detail

/// (r(0)^2, (1/3) int |r'|^2 / f_inf); the first never exceeds the second.
template <typename Scalar>
std::pair<Scalar, Scalar> check_lemma_boundary(const Perturbation<Scalar>& r) {
  detail::require_constrained(r, Scalar(1e-8));
  const Scalar r0 = extrapolate_to_origin<Scalar>(r.values());
  return {r0 * r0, weighted_dirichlet(r) / 3};
}

/// (int r^2 / f_inf, 4 mu^2 int |r'|^2 / f_inf).
template <typename Scalar>
std::pair<Scalar, Scalar> check_poincare(const Perturbation<Scalar>& r) {
  const Scalar mu = r.params().mu;
  return {2 * energy(r), 4 * mu * mu * weighted_dirichlet(r)};
}

template <typename Scalar = double>
struct DecaySeries {
  std::vector<Scalar> t;
  std::vector<Scalar> energy;
  Scalar max_mass_drift = 0;
  Scalar max_mean_drift = 0;
  Perturbation<Scalar> final_state;
};

/// Integrates the linearized flow, sampling E at the requested times.
template <typename Scalar>
DecaySeries<Scalar> decay_experiment(const Perturbation<Scalar>& r0, Scalar t_end,
                                     const std::vector<Scalar>& sample_times, Scalar dt = 0) {
  detail::require_constrained(r0, Scalar(1e-8));
  const ModelParams<Scalar>& p = r0.params();
  if (!(dt > 0)) dt = Scalar(0.8) * p.h() * p.h() / p.lambda;
  LinearStepper<Scalar> stepper(p, dt);

  const long long n_end = std::llround(t_end / dt);
  std::vector<char> is_sample(n_end + 1, 0);
  for (const Scalar t : sample_times) {
    if (t < 0 || t > t_end * (1 + Scalar(1e-12))) throw std::invalid_argument("sample time outside [0, t_end]");
    is_sample[std::min(std::llround(t / dt), n_end)] = 1;
  }

  DecaySeries<Scalar> out;
  const auto [m0, m1] = constraint_moments(r0);
  Perturbation<Scalar> r = r0;
  for (long long n = 0; n <= n_end; ++n) {
    if (is_sample[n]) {
      out.t.push_back(static_cast<Scalar>(n) * dt);
      out.energy.push_back(energy(r));
      const auto [a, b] = constraint_moments(r);
      out.max_mass_drift = std::max(out.max_mass_drift, std::abs(a - m0));
      out.max_mean_drift = std::max(out.max_mean_drift, std::abs(b - m1));
      if (!std::isfinite(static_cast<double>(out.energy.back())))
        throw NumericalAbort("linearized: energy is not finite");
    }
    if (n < n_end) stepper.advance(r);
  }
  out.final_state = std::move(r);
  return out;
}

/// r = (2 - 4v/mu + v^2/mu^2) e^{-v/mu}/mu: both moments vanish and the boundary inequality is sharp.
/// The discrete moments of its cell averages are O(h^2), so the result is projected.
template <typename Scalar>
Perturbation<Scalar> laguerre_extremal(const ModelParams<Scalar>& p) {
  const Scalar mu = p.mu;
  return project_constraints(project_cell_averages(p, [mu](Scalar v) {
    const Scalar x = v / mu;
    return (2 - 4 * x + x * x) * std::exp(-x) / mu;
  }));
}

/// f_inf times a random Laguerre series of degree 2..7, projected onto the constraints.
template <typename Scalar, typename Rng>
Perturbation<Scalar> random_perturbation(const ModelParams<Scalar>& p, Rng& rng) {
  std::uniform_int_distribution<int> degree(2, 7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int K = degree(rng);
  std::vector<double> c(K + 1);
  for (auto& ck : c) ck = gauss(rng);
  const Scalar mu = p.mu;
  const Perturbation<Scalar> raw = project_cell_averages(p, [&](Scalar v) {
    const double x = static_cast<double>(v / mu);
    double s = 0;
    for (int k = 0; k <= K; ++k) s += c[k] * std::laguerre(static_cast<unsigned>(k), x);
    return static_cast<Scalar>(s) * density::boltzmann_gibbs(v, mu);
  });
  return project_constraints(raw);
}

}  // namespace bdy

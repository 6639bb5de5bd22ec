#pragma once

// Functionals and distances used to monitor convergence to the
// Boltzmann-Gibbs equilibrium: relative entropy, its dissipation, relative
// Fisher information (with and without the boundary defect), Hellinger and L1
// distances, and the Fourier-based d2 distance.

#include "bdy/boundary.hpp"
#include "bdy/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bdy {

/// Cells below this density are excluded from Fisher/dissipation sums.
inline constexpr double kDensityFloor = 1e-300;

namespace detail {

template <typename Scalar>
void require_same_grid(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  if (!f.params().same_grid(g.params()))
    throw std::invalid_argument("grid functions live on different grids");
}

}  // namespace detail

/// H[f|g] = h sum f_j ln(f_j/g_j), with 0 ln 0 = 0.
template <typename Scalar>
Scalar relative_entropy(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  detail::require_same_grid(f, g);
  Scalar s = 0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    const Scalar fj = f[j];
    if (fj <= 0) continue;
    if (!(g[j] > 0)) throw std::domain_error("relative entropy: reference vanishes where f > 0");
    s += fj * std::log(fj / g[j]);
  }
  return f.h() * s;
}

/// D[f] = h sum (d_v f + f(0) f)^2 / f.
template <typename Scalar>
Scalar dissipation(const GridFunction<Scalar>& f) {
  const Scalar b = boundary_value(f);
  const Vector<Scalar> df = cell_derivative(f.values(), f.h());
  Scalar s = 0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (f[j] <= Scalar(kDensityFloor)) continue;
    const Scalar flux = df[j] + b * f[j];
    s += flux * flux / f[j];
  }
  return f.h() * s;
}

/// Boundary defect g(0) - f(0) with an explicit reference boundary value.
template <typename Scalar>
Scalar lambda_bdry(const GridFunction<Scalar>& f, Scalar reference_boundary_value) {
  return reference_boundary_value - boundary_value(f);
}

/// Lambda(t) = f_inf(0) - f(0,t) = 1/mu - f(0,t).
template <typename Scalar>
Scalar lambda_bdry(const GridFunction<Scalar>& f) {
  return lambda_bdry(f, Scalar(1) / f.params().mu);
}

/// I(f,g) = h sum f_j (d_v ln f_j - d_v ln g_j)^2.
template <typename Scalar>
Scalar fisher(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  detail::require_same_grid(f, g);
  const Scalar floor = Scalar(kDensityFloor);
  const Vector<Scalar> lf = f.values().array().max(floor).log().matrix();
  const Vector<Scalar> lg = g.values().array().max(floor).log().matrix();
  const Vector<Scalar> score = cell_derivative(lf, f.h()) - cell_derivative(lg, f.h());
  Scalar s = 0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (f[j] <= floor) continue;
    if (!(g[j] > floor)) throw std::domain_error("fisher: reference vanishes where f > 0");
    s += f[j] * score[j] * score[j];
  }
  return f.h() * s;
}

/// I_Lambda(f,g) = I(f,g) + Lambda^2 mass(f), Lambda = g(0) - f(0).
template <typename Scalar>
Scalar fisher_lambda(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g,
                     Scalar reference_boundary_value) {
  const Scalar lam = lambda_bdry(f, reference_boundary_value);
  return fisher(f, g) + lam * lam * mass(f);
}

template <typename Scalar>
Scalar fisher_lambda(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  return fisher_lambda(f, g, boundary_value(g));
}

template <typename Scalar>
Scalar hellinger(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  detail::require_same_grid(f, g);
  const auto diff = f.values().array().max(Scalar(0)).sqrt() - g.values().array().max(Scalar(0)).sqrt();
  return std::sqrt(f.h() * diff.square().sum());
}

template <typename Scalar>
Scalar l1(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  detail::require_same_grid(f, g);
  return f.h() * (f.values() - g.values()).cwiseAbs().sum();
}

struct FourierGrid {
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int per_decade = 200;

  template <typename Scalar>
  std::vector<Scalar> points() const {
    const double decades = std::log10(xi_max / xi_min);
    const int n = static_cast<int>(std::lround(decades * per_decade));
    std::vector<Scalar> xs(n + 1);
    for (int k = 0; k <= n; ++k)
      xs[k] = static_cast<Scalar>(xi_min * std::pow(10.0, decades * k / n));
    return xs;
  }
};

template <typename Scalar>
struct D2Result {
  Scalar value = 0;        ///< max over the xi grid and the xi -> 0 limit
  Scalar argmax_xi = 0;    ///< 0 when the small-xi limit wins
  Scalar small_xi_limit = 0;
};

namespace detail {

// sin(x)/x - 1
template <typename Scalar>
Scalar sinc_minus_one(Scalar x) {
  if (std::abs(x) < Scalar(1e-2)) {
    const Scalar x2 = x * x;
    return -x2 / 6 + x2 * x2 / 120;
  }
  return std::sin(x) / x - 1;
}

// sin(x) - x
template <typename Scalar>
Scalar sin_minus_id(Scalar x) {
  if (std::abs(x) < Scalar(0.1)) {
    const Scalar x2 = x * x;
    return x * x2 * (-Scalar(1) / 6 + x2 * (Scalar(1) / 120 + x2 * (-Scalar(1) / 5040 + x2 / 362880)));
  }
  return std::sin(x) - x;
}

template <typename Scalar>
void require_matched_moments(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g) {
  require_same_grid(f, g);
  const Scalar tol = Scalar(1e-8);
  if (std::abs(mass(f) - mass(g)) > tol || std::abs(mean(f) - mean(g)) > tol)
    throw std::domain_error("d2_fourier: mass and mean must agree");
}

// |sum_j d_j T_j(xi)| / xi^2 where T_j is the exact transform of cell j with its
// zeroth and first Taylor terms removed analytically; those cancel for pairs
// with matched mass and mean, and dropping them keeps small xi free of
// cancellation error.
template <typename Scalar>
Scalar d2_ratio(const Vector<Scalar>& d, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& v, Scalar h, Scalar xi) {
  const Scalar s = h * (1 + sinc_minus_one(xi * h / 2));  // 2 sin(xi h/2)/xi
  const Scalar s_minus_h = h * sinc_minus_one(xi * h / 2);
  Scalar re = 0;
  Scalar im = 0;
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    const Scalar x = v[j] * xi;
    const Scalar half = std::sin(x / 2);
    re += d[j] * (-2 * half * half * s + s_minus_h);
    im -= d[j] * (sin_minus_id(x) * s + x * s_minus_h);
  }
  return std::hypot(re, im) / (xi * xi);
}

}  // namespace detail

/// |f^(xi) - g^(xi)| / xi^2 at one frequency, with f^ the exact transform of
/// the piecewise-constant density. Mass and mean must agree within 1e-8.
template <typename Scalar>
Scalar d2_integrand(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g, Scalar xi) {
  detail::require_matched_moments(f, g);
  const Vector<Scalar> d = f.values() - g.values();
  return detail::d2_ratio(d, f.centers(), f.h(), xi);
}

/// d2(f,g) = sup_xi |f^(xi) - g^(xi)| / xi^2 over a log-spaced grid, plus the
/// xi -> 0 limit |M2(f) - M2(g)|/2 (exact second moments of the densities).
template <typename Scalar>
D2Result<Scalar> d2_fourier(const GridFunction<Scalar>& f, const GridFunction<Scalar>& g,
                            const FourierGrid& grid = {}) {
  detail::require_matched_moments(f, g);
  const Scalar h = f.h();
  const Vector<Scalar> d = f.values() - g.values();
  const auto v = f.centers();

  D2Result<Scalar> out;
  out.small_xi_limit = std::abs((d.array() * (h * v.square() + h * h * h / 12)).sum()) / 2;
  out.value = out.small_xi_limit;
  for (const Scalar xi : grid.points<Scalar>()) {
    const Scalar val = detail::d2_ratio(d, v, h, xi);
    if (val > out.value) {
      out.value = val;
      out.argmax_xi = xi;
    }
  }
  return out;
}

/// |e^{-i alpha xi} - 1| / |xi|^s, the shift symbol bounded in the limit argument.
template <typename Scalar>
Scalar shift_symbol_ratio(Scalar alpha, Scalar xi, Scalar s) {
  return 2 * std::abs(std::sin(alpha * xi / 2)) / std::pow(std::abs(xi), s);
}

/// One time sample of every scalar diagnostic.
struct DiagnosticsRow {
  double t = 0;
  double mass = 0;
  double mean = 0;
  double m2 = 0;
  double m3 = 0;
  double boundary_value = 0;
  double entropy = 0;
  double dissipation = 0;
  double fisher = 0;
  double lambda_bdry = 0;
  double fisher_lambda = 0;
  double hellinger = 0;
  double l1 = 0;
};

/// All diagnostics of f against the equilibrium f_inf at time t.
template <typename Scalar>
DiagnosticsRow diagnose(const GridFunction<Scalar>& f, const GridFunction<Scalar>& f_inf, Scalar t) {
  DiagnosticsRow row;
  const Scalar f_inf_0 = Scalar(1) / f.params().mu;
  row.t = static_cast<double>(t);
  row.mass = static_cast<double>(mass(f));
  row.mean = static_cast<double>(mean(f));
  row.m2 = static_cast<double>(moment(f, 2));
  row.m3 = static_cast<double>(moment(f, 3));
  row.boundary_value = static_cast<double>(boundary_value(f));
  row.entropy = static_cast<double>(relative_entropy(f, f_inf));
  row.dissipation = static_cast<double>(dissipation(f));
  row.fisher = static_cast<double>(fisher(f, f_inf));
  row.lambda_bdry = static_cast<double>(lambda_bdry(f, f_inf_0));
  row.fisher_lambda = static_cast<double>(fisher_lambda(f, f_inf, f_inf_0));
  row.hellinger = static_cast<double>(hellinger(f, f_inf));
  row.l1 = static_cast<double>(l1(f, f_inf));
  return row;
}

}  // namespace bdy

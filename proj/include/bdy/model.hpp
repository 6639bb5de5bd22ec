#pragma once

// Shared domain types for the wealth-exchange laboratory: model
// parameters, cell-averaged grid functions on [0, v_max], probability mass
// functions on {0..n_max}, and the two reference equilibria.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace bdy {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when a time integrator produces NaNs or loses positivity.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar = double>
struct ModelParams {
  Scalar mu = 1;        ///< mean wealth per agent
  Scalar lambda = 2;    ///< interaction rate; lambda/2 is the diffusion coefficient
  Scalar epsilon = 0.1; ///< exchange quantum
  Scalar v_max = 40;    ///< domain truncation
  int n_cells = 4000;

  Scalar h() const { return v_max / static_cast<Scalar>(n_cells); }

  void validate() const {
    if (!(mu > 0)) throw std::invalid_argument("mu must be positive");
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    if (!(epsilon > 0) || !(epsilon < v_max))
      throw std::invalid_argument("epsilon must satisfy 0 < epsilon < v_max");
    if (!(v_max > 0)) throw std::invalid_argument("v_max must be positive");
    if (n_cells < 16) throw std::invalid_argument("n_cells must be at least 16");
  }

  bool same_grid(const ModelParams& o) const {
    return n_cells == o.n_cells && v_max == o.v_max;
  }
};

/// Default parameters with v_max = 40 mu and the given cell width.
template <typename Scalar = double>
ModelParams<Scalar> default_params(Scalar mu, Scalar h, Scalar lambda = 2, Scalar epsilon = 0.1,
                                   Scalar v_max_over_mu = 40) {
  ModelParams<Scalar> p;
  p.mu = mu;
  p.lambda = lambda;
  p.epsilon = epsilon;
  p.v_max = v_max_over_mu * mu;
  p.n_cells = static_cast<int>(std::lround(p.v_max / h));
  p.validate();
  return p;
}

/// Cell averages of a density on the uniform grid v_j = (j + 1/2) h.
template <typename Scalar = double>
class GridFunction {
 public:
  using VectorType = Vector<Scalar>;

  GridFunction() = default;
  explicit GridFunction(const ModelParams<Scalar>& params)
      : params_(params), values_(VectorType::Zero(params.n_cells)) {
    params_.validate();
  }
  GridFunction(const ModelParams<Scalar>& params, VectorType values)
      : params_(params), values_(std::move(values)) {
    params_.validate();
    if (values_.size() != params_.n_cells)
      throw std::invalid_argument("grid function size does not match n_cells");
  }

  const ModelParams<Scalar>& params() const { return params_; }
  const VectorType& values() const { return values_; }
  VectorType& values() { return values_; }

  Eigen::Index size() const { return values_.size(); }
  Scalar h() const { return params_.h(); }
  Scalar center(Eigen::Index j) const { return (static_cast<Scalar>(j) + Scalar(0.5)) * h(); }
  Scalar operator[](Eigen::Index j) const { return values_[j]; }

  /// Cell centers as an array expression.
  Eigen::Array<Scalar, Eigen::Dynamic, 1> centers() const {
    const Scalar hh = h();
    return Eigen::Array<Scalar, Eigen::Dynamic, 1>::LinSpaced(size(), hh / 2, hh * (size() - Scalar(0.5)));
  }

 private:
  ModelParams<Scalar> params_{};
  VectorType values_{};
};

/// Probability mass function on {0, ..., n_max}.
template <typename Scalar = double>
struct Pmf {
  Vector<Scalar> probs;

  Pmf() = default;
  explicit Pmf(Vector<Scalar> p) : probs(std::move(p)) {}

  Eigen::Index n_max() const { return probs.size() - 1; }
  Scalar operator[](Eigen::Index n) const { return n < probs.size() ? probs[n] : Scalar(0); }
  Scalar total() const { return probs.sum(); }
  Scalar mean() const {
    return (Vector<Scalar>::LinSpaced(probs.size(), 0, static_cast<Scalar>(probs.size() - 1))
                .array() * probs.array()).sum();
  }
  /// Fraction of agents able to give one unit.
  Scalar rich_fraction() const { return probs.size() > 1 ? probs.tail(probs.size() - 1).sum() : Scalar(0); }
};

template <typename Scalar>
Scalar l1_distance(const Pmf<Scalar>& p, const Pmf<Scalar>& q) {
  const Eigen::Index n = std::max(p.probs.size(), q.probs.size());
  Scalar s = 0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::abs(p[i] - q[i]);
  return s;
}

// Pointwise densities.
namespace density {

template <typename Scalar>
Scalar boltzmann_gibbs(Scalar v, Scalar mu) {
  return std::exp(-v / mu) / mu;
}

/// (2/mu) (1 - v/(2mu))^2 e^{-v/mu}; satisfies d_v f(0) + f(0)^2 = 0.
template <typename Scalar>
Scalar gamma_type(Scalar v, Scalar mu) {
  const Scalar s = Scalar(1) - v / (2 * mu);
  return Scalar(2) / mu * s * s * std::exp(-v / mu);
}

}  // namespace density

/// Cell averages of fn by 3-point Gauss-Legendre quadrature on each cell.
template <typename Scalar, typename Fn>
GridFunction<Scalar> project_cell_averages(const ModelParams<Scalar>& params, Fn&& fn) {
  GridFunction<Scalar> g(params);
  const Scalar h = params.h();
  const Scalar x = std::sqrt(Scalar(3) / Scalar(5));
  const std::array<Scalar, 3> nodes{-x, Scalar(0), x};
  const std::array<Scalar, 3> weights{Scalar(5) / 18, Scalar(8) / 18, Scalar(5) / 18};
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const Scalar mid = g.center(j);
    Scalar s = 0;
    for (int q = 0; q < 3; ++q) s += weights[q] * fn(mid + nodes[q] * h / 2);
    g.values()[j] = s;
  }
  return g;
}

/// Exact cell averages of e^{-v/mu}/mu.
template <typename Scalar>
GridFunction<Scalar> boltzmann_gibbs(const ModelParams<Scalar>& params) {
  GridFunction<Scalar> g(params);
  const Scalar h = params.h();
  const Scalar mu = params.mu;
  // e^{-a/mu} - e^{-(a+h)/mu} = -e^{-a/mu} expm1(-h/mu), accurate for small h/mu
  const Scalar cell = -std::expm1(-h / mu) / h;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    g.values()[j] = std::exp(-static_cast<Scalar>(j) * h / mu) * cell;
  return g;
}

template <typename Scalar>
GridFunction<Scalar> gamma_initial(const ModelParams<Scalar>& params) {
  const Scalar mu = params.mu;
  return project_cell_averages(params, [mu](Scalar v) { return density::gamma_type(v, mu); });
}

/// p*_n = (1/(1+mu)) (mu/(1+mu))^n, n = 0..n_max.
template <typename Scalar = double>
Pmf<Scalar> geometric_equilibrium(Scalar mu, int n_max) {
  if (!(mu > 0)) throw std::invalid_argument("mu must be positive");
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  Vector<Scalar> p(n_max + 1);
  const Scalar ratio = mu / (1 + mu);
  for (int n = 0; n <= n_max; ++n) p[n] = std::pow(ratio, static_cast<Scalar>(n)) / (1 + mu);
  return Pmf<Scalar>(std::move(p));
}

/// Default truncation index ceil(40 mu).
template <typename Scalar>
int default_n_max(Scalar mu) {
  return static_cast<int>(std::ceil(40 * mu));
}

// Midpoint-rule moments h * sum v_j^n g_j.

template <typename Scalar>
Scalar moment(const GridFunction<Scalar>& g, int n) {
  if (n < 0 || n > 3) throw std::invalid_argument("moment order must be in {0,1,2,3}");
  const auto v = g.centers();
  return g.h() * (v.pow(static_cast<Scalar>(n)) * g.values().array()).sum();
}

template <typename Scalar>
Scalar mass(const GridFunction<Scalar>& g) {
  return g.h() * g.values().sum();
}

template <typename Scalar>
Scalar mean(const GridFunction<Scalar>& g) {
  return moment(g, 1);
}

}  // namespace bdy

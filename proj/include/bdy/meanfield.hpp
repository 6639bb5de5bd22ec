#pragma once

// Truncated mean-field system on {0..n_max}:
//   p_0' = p_1 - r p_0,
//   p_n' = p_{n+1} + r p_{n-1} - (1 + r) p_n,   r = sum_{n>=1} p_n,
// with p_{n_max+1} := 0. The closure leaks mass at rate r p_{n_max}.

#include "bdy/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bdy {

template <typename Scalar>
Vector<Scalar> meanfield_rhs(const Vector<Scalar>& p) {
  const Eigen::Index n = p.size();
  if (n < 2) throw std::invalid_argument("pmf needs at least two entries");
  const Scalar r = p.tail(n - 1).sum();
  Vector<Scalar> d(n);
  d[0] = p[1] - r * p[0];
  d.segment(1, n - 2) = p.tail(n - 2) + r * p.head(n - 2) - (1 + r) * p.segment(1, n - 2);
  d[n - 1] = r * p[n - 2] - (1 + r) * p[n - 1];
  return d;
}

template <typename Scalar>
Vector<Scalar> rhs(const Pmf<Scalar>& p) {
  return meanfield_rhs(p.probs);
}

template <typename Scalar = double>
struct OdeState {
  Pmf<Scalar> pmf;
  Scalar t = 0;
  Scalar r = 0;
};

template <typename Scalar = double>
struct OdeTrajectory {
  std::vector<OdeState<Scalar>> states;
  Scalar total_clipped = 0;  ///< mass removed by clipping undershoots in (-1e-12, 0)
  Scalar max_leak_rate = 0;  ///< max over steps of r p_{n_max}
};

/// Classical RK4 with fixed dt. States are kept every sample_every steps and at t_end.
template <typename Scalar>
OdeTrajectory<Scalar> integrate(const Pmf<Scalar>& p0, Scalar t_end, Scalar dt = Scalar(0.01), int sample_every = 1) {
  if (!(dt > 0) || dt > Scalar(0.1)) throw std::invalid_argument("mean-field dt must lie in (0, 0.1]");
  if (p0.probs.size() < 2) throw std::invalid_argument("pmf needs at least two entries");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be positive");
  const long long n_end = std::llround(t_end / dt);

  OdeTrajectory<Scalar> out;
  Vector<Scalar> p = p0.probs;
  auto record = [&](long long n) {
    OdeState<Scalar> s;
    s.pmf = Pmf<Scalar>(p);
    s.t = static_cast<Scalar>(n) * dt;
    s.r = p.tail(p.size() - 1).sum();
    out.states.push_back(std::move(s));
  };
  record(0);
  for (long long n = 1; n <= n_end; ++n) {
    const Vector<Scalar> k1 = meanfield_rhs(p);
    const Vector<Scalar> k2 = meanfield_rhs<Scalar>(p + dt / 2 * k1);
    const Vector<Scalar> k3 = meanfield_rhs<Scalar>(p + dt / 2 * k2);
    const Vector<Scalar> k4 = meanfield_rhs<Scalar>(p + dt * k3);
    p += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);

    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!std::isfinite(static_cast<double>(p[i])) || p[i] < Scalar(-1e-12))
        throw NumericalAbort("mean-field: entry " + std::to_string(i) + " went negative at t=" +
                             std::to_string(static_cast<double>(n * dt)));
      if (p[i] < 0) {
        out.total_clipped -= p[i];
        p[i] = 0;
      }
    }
    out.max_leak_rate = std::max(out.max_leak_rate, p.tail(p.size() - 1).sum() * p[p.size() - 1]);
    if (n % sample_every == 0 || n == n_end) record(n);
  }
  return out;
}

/// sum p_n ln(p_n / q_n) with 0 ln 0 = 0.
template <typename Scalar>
Scalar entropy_pmf(const Pmf<Scalar>& p, const Pmf<Scalar>& q) {
  Scalar s = 0;
  for (Eigen::Index n = 0; n < p.probs.size(); ++n) {
    const Scalar pn = p.probs[n];
    if (pn <= 0) continue;
    const Scalar qn = q[n];
    if (!(qn > 0)) throw std::domain_error("entropy_pmf: q vanishes where p > 0");
    s += pn * std::log(pn / qn);
  }
  return s;
}

/// Point mass at n on {0..n_max}.
template <typename Scalar = double>
Pmf<Scalar> delta_pmf(int n, int n_max) {
  if (n < 0 || n > n_max) throw std::invalid_argument("delta position outside {0..n_max}");
  Vector<Scalar> p = Vector<Scalar>::Zero(n_max + 1);
  p[n] = 1;
  return Pmf<Scalar>(std::move(p));
}

}  // namespace bdy

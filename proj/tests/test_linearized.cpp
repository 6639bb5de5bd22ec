#include "bdy/linearized.hpp"
#include "oracles/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace bdy;
using doctest::Approx;

TEST_CASE("constraint projection") {
  const auto p = linear_params<double>(1.0, 0.02);
  std::mt19937_64 rng(1);
  const auto r = random_perturbation(p, rng);
  const auto [m0, m1] = constraint_moments(r);
  CHECK(std::abs(m0) <= 1e-13);
  CHECK(std::abs(m1) <= 1e-13);
  const auto again = project_constraints(r);
  CHECK((again.values() - r.values()).cwiseAbs().maxCoeff() <= 1e-13);

  // the equilibrium itself has nonzero mass, so it projects to zero
  const auto finf = boltzmann_gibbs(p);
  CHECK(project_constraints(finf).values().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(check_lemma_boundary(finf), std::invalid_argument);
}

TEST_CASE("zero perturbation stays zero") {
  const auto p = linear_params<double>(1.0, 0.02);
  Perturbation<double> r(p);
  LinearStepper<double> st(p, 0.4 * p.h() * p.h());
  for (int n = 0; n < 100; ++n) st.advance(r);
  CHECK(r.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mass and mean of the perturbation stay at zero") {
  const auto p = linear_params<double>(1.0, 0.05);
  std::mt19937_64 rng(2);
  auto r = random_perturbation(p, rng);
  LinearStepper<double> st(p, 0.4 * p.h() * p.h());
  double worst = 0;
  for (int n = 0; n < 10000; ++n) {
    st.advance(r);
    const auto [m0, m1] = constraint_moments(r);
    worst = std::max({worst, std::abs(m0), std::abs(m1)});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("step limit is enforced") {
  const auto p = linear_params<double>(1.0, 0.02);
  const auto r = laguerre_extremal(p);
  CHECK_THROWS_AS(step_linear(r, 0.5 * p.h() * p.h()), std::invalid_argument);
  CHECK_NOTHROW(step_linear(r, 0.4 * p.h() * p.h()));
}

TEST_CASE("energy rate matches the integration-by-parts identity") {
  const auto p = linear_params<double>(1.0, 0.01);
  std::mt19937_64 rng(4);
  const double dt = 0.4 * p.h() * p.h();
  for (int k = 0; k < 4; ++k) {
    const auto r = k == 0 ? laguerre_extremal(p) : random_perturbation(p, rng);
    const double rate = (energy(step_linear(r, dt)) - energy(r)) / dt;
    CHECK(rate == Approx(energy_rate_identity(r)).epsilon(0.05));
    CHECK(rate <= 0.0);
  }
}

TEST_CASE("energy of the extremal") {
  // (1/2) int r^2 / f_inf = 2 int L_2^2 e^{-x} dx = 2, for any mu
  const double ref = oracle::integrate_half_line([](double x) {
    const double q = 2 - 4 * x + x * x;
    return x < 700 ? 0.5 * q * q * std::exp(-x) : 0.0;
  });
  CHECK(ref == Approx(2).epsilon(1e-12));
  for (double mu : {1.0, 2.5}) {
    const auto p = linear_params<double>(mu, 0.005 * mu);
    const auto r = laguerre_extremal(p);
    CHECK(energy(r) == Approx(ref).epsilon(1e-3));
    Perturbation<double> r3(p, 3 * r.values());
    CHECK(energy(r3) == Approx(9 * energy(r)).epsilon(1e-13));
  }
}

TEST_CASE("boundary inequality is sharp on the extremal") {
  const auto p = linear_params<double>(1.0, 0.005);
  const auto [lhs, rhs] = check_lemma_boundary(laguerre_extremal(p));
  CHECK(lhs == Approx(4).epsilon(0.01));
  CHECK(rhs == Approx(4).epsilon(0.01));
  // and scales as 1/mu^2
  const auto q = linear_params<double>(2.0, 0.01);
  const auto [l2, r2] = check_lemma_boundary(laguerre_extremal(q));
  CHECK(l2 == Approx(1).epsilon(0.01));
  CHECK(r2 == Approx(1).epsilon(0.01));
}

TEST_CASE("boundary and Poincare inequalities on random perturbations") {
  const auto p = linear_params<double>(1.0, 0.01);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto r = random_perturbation(p, rng);
    const auto [a, b] = check_lemma_boundary(r);
    CHECK(a <= b * 1.01);
    const auto [c, d] = check_poincare(r);
    CHECK(c <= d * 1.01);
  }
}

TEST_CASE("Poincare pair for v e^{-v}") {
  // int v^2 e^{-v} = 2 and 4 int (1 - v)^2 e^{-v} = 4
  const auto p = linear_params<double>(1.0, 0.005);
  const auto r = project_cell_averages(p, [](double v) { return v * std::exp(-v); });
  const auto [c, d] = check_poincare(r);
  CHECK(c == Approx(2).epsilon(1e-3));
  CHECK(d == Approx(4).epsilon(1e-2));
}

TEST_CASE("energy halves by 6 ln 2 and stays under the exponential bound") {
  const auto p = linear_params<double>(1.0, 0.02);
  const double t_half = 6 * std::log(2.0);
  std::vector<double> samples;
  for (int k = 0; k <= 20; ++k) samples.push_back(t_half * k / 20);
  const auto s = decay_experiment(laguerre_extremal(p), t_half, samples);
  REQUIRE(s.energy.size() == samples.size());
  const double e0 = s.energy.front();
  CHECK(s.energy.back() <= e0 / 2);
  for (std::size_t i = 0; i < s.t.size(); ++i) CHECK(s.energy[i] <= e0 * std::exp(-s.t[i] / 6) * 1.02);
  for (std::size_t i = 1; i < s.t.size(); ++i) CHECK(s.energy[i] <= s.energy[i - 1]);
  CHECK(s.max_mass_drift <= 1e-10);
  CHECK(s.max_mean_drift <= 1e-10);
}

TEST_CASE("decay is linear in the initial amplitude") {
  const auto p = linear_params<double>(1.0, 0.05);
  std::mt19937_64 rng(9);
  const auto r = random_perturbation(p, rng);
  const Perturbation<double> big(p, 100 * r.values());
  const std::vector<double> ts{0, 1, 2};
  const auto a = decay_experiment(r, 2.0, ts);
  const auto b = decay_experiment(big, 2.0, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(b.energy[i] == Approx(1e4 * a.energy[i]).epsilon(1e-10));
}

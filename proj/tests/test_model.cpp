#include "bdy/model.hpp"
#include "oracles/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace bdy;
using doctest::Approx;

TEST_CASE("equilibrium cell averages integrate exactly") {
  const auto p = default_params<double>(1.0, 0.01);
  const auto g = boltzmann_gibbs(p);
  CHECK(std::abs(mass(g) - (1 - std::exp(-40.0))) <= 1e-14);
  CHECK(g.size() == 4000);
  for (Eigen::Index j = 0; j < g.size(); j += 997) {
    const double a = j * p.h(), b = a + p.h();
    const double cell = oracle::integrate([](double v) { return std::exp(-v); }, a, b) / p.h();
    CHECK(g[j] == Approx(cell).epsilon(1e-13));
  }
}

TEST_CASE("equilibrium moments are n! mu^n up to O(h^2)") {
  for (double mu : {1.0, 2.5}) {
    const auto g = boltzmann_gibbs(default_params<double>(mu, 0.01 * mu));
    CHECK(mass(g) == Approx(1).epsilon(1e-10));
    CHECK(mean(g) == Approx(mu).epsilon(1e-4));
    CHECK(moment(g, 2) == Approx(2 * mu * mu).epsilon(1e-4));
    CHECK(moment(g, 3) == Approx(6 * mu * mu * mu).epsilon(1e-4));
  }
  // pointwise value at the origin
  CHECK(density::boltzmann_gibbs(0.0, 1.0) == 1.0);
}

TEST_CASE("moments of the zero function vanish and bad orders are rejected") {
  const GridFunction<double> z(default_params<double>(1.0, 0.1));
  for (int n = 0; n <= 3; ++n) CHECK(moment(z, n) == 0.0);
  CHECK_THROWS_AS(moment(z, 4), std::invalid_argument);
  CHECK_THROWS_AS(moment(z, -1), std::invalid_argument);
}

TEST_CASE("geometric equilibrium") {
  const auto p = geometric_equilibrium(1.0, 60);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == 0.125);
  CHECK(p.total() == Approx(1 - std::pow(2.0, -61)).epsilon(1e-15));
  CHECK(geometric_equilibrium(4.0, 400).mean() == Approx(4).epsilon(1e-12));
  CHECK_THROWS_AS(geometric_equilibrium(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(geometric_equilibrium(1.0, 0), std::invalid_argument);
  CHECK(default_n_max(4.0) == 160);
}

TEST_CASE("geometric law approaches the exponential for large mu") {
  for (double mu : {20.0, 35.0}) {
    const int n_max = default_n_max(mu);
    const auto p = geometric_equilibrium(mu, n_max);
    double l1 = 0;
    for (int n = 0; n <= n_max; ++n) l1 += std::abs(p[n] - oracle::exponential_density(n, mu));
    CHECK(l1 <= 2 / mu);
  }
}

TEST_CASE("Gamma-type datum") {
  CHECK(density::gamma_type(0.0, 1.0) == 2.0);
  CHECK(density::gamma_type(0.0, 2.0) == 1.0);
  // Robin compatibility d_v f(0) + f(0)^2 = 0 by central difference
  const double d = 1e-5;
  const double slope = (density::gamma_type(d, 1.0) - density::gamma_type(-d, 1.0)) / (2 * d);
  CHECK(slope == Approx(-4).epsilon(1e-8));
  CHECK(slope + 4.0 == Approx(0).epsilon(1e-8));

  const auto g = gamma_initial(default_params<double>(1.0, 0.01));
  CHECK(oracle::gamma_moment(0, 1) == 1.0);
  CHECK(oracle::gamma_moment(1, 1) == 1.0);
  CHECK(mass(g) == Approx(oracle::gamma_moment(0, 1)).epsilon(1e-12));
  // midpoint moments of cell averages carry an h^2/12 f(0) offset
  CHECK(mean(g) == Approx(oracle::gamma_moment(1, 1)).epsilon(2e-5));
  CHECK(moment(g, 2) == Approx(oracle::gamma_moment(2, 1)).epsilon(1e-4));
}

TEST_CASE("cell-average projection matches adaptive quadrature") {
  const auto p = default_params<double>(1.5, 0.05);
  const auto g = gamma_initial(p);
  for (Eigen::Index j : {0, 13, 40, 400}) {
    const double a = j * p.h();
    const double ref = oracle::integrate([](double v) { return oracle::gamma_density(v, 1.5); }, a, a + p.h()) / p.h();
    CHECK(g[j] == Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("parameter validation") {
  ModelParams<double> p;
  CHECK_NOTHROW(p.validate());
  p.n_cells = 8;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.mu = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.epsilon = 50;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  CHECK_THROWS_AS(GridFunction<double>(p, Vector<double>::Zero(3)), std::invalid_argument);
}

TEST_CASE("pmf helpers") {
  Pmf<double> p(Vector<double>::Constant(4, 0.25));
  CHECK(p.n_max() == 3);
  CHECK(p[10] == 0.0);
  CHECK(p.mean() == Approx(1.5));
  CHECK(p.rich_fraction() == Approx(0.75));
  Pmf<double> q(Vector<double>::Constant(2, 0.5));
  CHECK(l1_distance(p, q) == Approx(1.0));
}

TEST_CASE("templated on scalar: long double instantiation") {
  ModelParams<long double> p;
  p.n_cells = 400;
  const auto g = boltzmann_gibbs(p);
  CHECK(static_cast<double>(mass(g)) == Approx(1).epsilon(1e-12));
}

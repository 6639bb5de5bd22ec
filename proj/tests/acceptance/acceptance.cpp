// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "bdy/agent_sim.hpp"
#include "bdy/diagnostics.hpp"
#include "bdy/epsilon_boltzmann.hpp"
#include "bdy/fokker_planck.hpp"
#include "bdy/linearized.hpp"
#include "bdy/meanfield.hpp"
#include "oracles/oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace bdy;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::vector<double> uniform(double t_end, int intervals) {
  std::vector<double> t;
  for (int k = 0; k <= intervals; ++k) t.push_back(t_end * k / intervals);
  return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Shared by AC1 and AC3: the Gamma-type datum at mu = 1, h = 0.01, v_max = 40, dt = 0.4 h^2.
struct EntropyRun {
  FpTrajectory<double> tr;
  double seconds = 0;
};

const EntropyRun& entropy_run() {
  static const EntropyRun run = [] {
    const auto p = default_params<double>(1.0, 0.01);
    FpOptions<double> opt;
    opt.t_end = 20;
    opt.dt = 0.4 * p.h() * p.h();
    opt.sample_times = uniform(20, 200);
    const auto t0 = Clock::now();
    EntropyRun r;
    r.tr = solve(gamma_initial(p), opt);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

void ac1(Outcome& o) {
  const auto& run = entropy_run();
  double mass_err = 0, mean_err = 0;
  for (const auto& r : run.tr.rows) {
    mass_err = std::max(mass_err, std::abs(r.mass - 1));
    mean_err = std::max(mean_err, std::abs(r.mean - 1));
  }
  o.detail << "max|mass-1|=" << mass_err << " max|mean-1|=" << mean_err << " runtime=" << run.seconds << "s";
  o.require(mass_err <= 1e-12, "mass");
  o.require(mean_err <= 1e-4, "mean");
  o.require(run.seconds <= 60, "runtime");
}

void ac2(Outcome& o) {
  const auto p = default_params<double>(1.0, 0.01);
  const auto finf = boltzmann_gibbs(p);
  const std::vector<double> times = uniform(10, 10);

  FpOptions<double> fo;
  fo.t_end = 10;
  fo.snapshot_times = times;
  fo.entropy_rate = false;
  double fp = 0;
  for (const auto& f : solve(finf, fo).snapshots) fp = std::max(fp, l1(f, finf));

  EpsOptions<double> eo;
  eo.eps = 0.1;
  eo.t_end = 10;
  eo.snapshot_times = times;
  double eb = 0;
  for (const auto& f : run_scaled(finf, eo).snapshots) eb = std::max(eb, l1(f, finf));

  o.detail << "fokker_planck L1=" << fp << " eps_boltzmann L1=" << eb;
  o.require(fp <= 1e-8, "fokker-planck");
  o.require(eb <= 1e-8, "eps-boltzmann");
}

double identity_error(const FpTrajectory<double>& tr) {
  double worst = 0;
  for (std::size_t i = 0; i < tr.rows.size(); ++i)
    worst = std::max(worst, std::abs(tr.entropy_rate[i] + tr.rows[i].dissipation) / tr.rows[i].dissipation);
  return worst;
}

void ac3(Outcome& o) {
  const auto& tr = entropy_run().tr;
  double max_step_increase = -1, max_sample_increase = -1;
  for (std::size_t i = 0; i < tr.rows.size(); ++i) {
    max_step_increase = std::max(max_step_increase, tr.entropy_rate[i] * tr.dt);
    if (i) max_sample_increase = std::max(max_sample_increase, tr.rows[i].entropy - tr.rows[i - 1].entropy);
  }
  const double ratio = tr.rows.back().entropy / tr.rows.front().entropy;
  const double id = identity_error(tr);

  // refined 4x in h; dt = 0.4 h^2 shrinks 16x to stay inside the diffusion limit
  const auto fine = default_params<double>(1.0, 0.0025);
  FpOptions<double> opt;
  opt.t_end = 20;
  opt.dt = 0.4 * fine.h() * fine.h();
  opt.sample_times = uniform(20, 200);
  const double id_fine = identity_error(solve(gamma_initial(fine), opt));

  o.detail << "max one-step dH=" << max_step_increase << " max sample dH=" << max_sample_increase
           << " H(20)/H(0)=" << ratio << " identity=" << id << " refined identity=" << id_fine;
  o.require(max_step_increase <= 1e-10 && max_sample_increase <= 1e-10, "monotone");
  o.require(ratio <= 0.01, "decay");
  o.require(id <= 0.05, "identity");
  o.require(id_fine <= 0.015, "refined identity");
}

void ac4(Outcome& o) {
  const auto t0 = Clock::now();
  const auto p = default_params<double>(1.0, 0.01);
  const auto f0 = gamma_initial(p);
  FpOptions<double> fo;
  fo.t_end = 2;
  fo.snapshot_times = {2};
  fo.entropy_rate = false;
  const auto ref = solve(f0, fo).snapshots.back();

  std::vector<double> d2;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    EpsOptions<double> eo;
    eo.eps = eps;
    eo.t_end = 2;
    eo.snapshot_times = {2};
    d2.push_back(d2_fourier(run_scaled(f0, eo).snapshots.back(), ref).value);
  }
  const double secs = seconds_since(t0);
  o.detail << "d2=[" << d2[0] << ", " << d2[1] << ", " << d2[2] << ", " << d2[3] << "] ratios=" << d2[1] / d2[2]
           << ", " << d2[2] / d2[3] << " runtime=" << secs << "s";
  o.require(d2[0] > d2[1] && d2[1] > d2[2] && d2[2] > d2[3], "monotone");
  for (int k = 1; k <= 2; ++k) {
    const double ratio = d2[k] / d2[k + 1];
    o.require(ratio >= 1.6 && ratio <= 2.6, "ratio");
  }
  o.require(secs <= 600, "runtime");
}

void ac5(Outcome& o) {
  const auto p = linear_params<double>(1.0, 0.02);
  const double t_half = 6 * std::log(2.0);
  std::vector<double> samples = uniform(12, 120);
  samples.push_back(t_half);
  std::sort(samples.begin(), samples.end());
  std::mt19937_64 rng(20240601);
  double worst = 0, half = 0;
  for (int k = 0; k < 5; ++k) {
    const auto s = decay_experiment(random_perturbation(p, rng), 12.0, samples);
    const double e0 = s.energy.front();
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      worst = std::max(worst, s.energy[i] / (e0 * std::exp(-s.t[i] / 6)));
      if (std::abs(s.t[i] - t_half) < 1e-3) half = std::max(half, s.energy[i] / e0);
    }
  }
  o.detail << "max E/(E0 e^{-t/6})=" << worst << " max E(6 ln 2)/E0=" << half;
  o.require(worst <= 1.02, "bound");
  o.require(half > 0 && half <= 0.5, "half-life");
}

void ac6(Outcome& o) {
  // reference pair by quadrature of the continuous extremal
  // r = (2 - 4v + v^2) e^{-v}, r' = (-6 + 6v - v^2) e^{-v}; |r'|^2 / f_inf = (-6 + 6v - v^2)^2 e^{-v}
  const double ref_lhs = 2.0 * 2.0;
  const double ref_rhs = oracle::integrate_half_line([](double v) {
                           const double q = -6 + 6 * v - v * v;
                           return v < 700 ? q * q * std::exp(-v) : 0.0;
                         }) / 3;

  const auto [lhs, rhs] = check_lemma_boundary(laguerre_extremal(linear_params<double>(1.0, 0.005)));
  o.detail << "computed (" << lhs << ", " << rhs << ") reference (" << ref_lhs << ", " << ref_rhs << ")";
  o.require(rel(lhs, 4) <= 0.01 && rel(rhs, 4) <= 0.01, "pair");
  o.require(rel(ref_lhs, 4) <= 1e-12 && rel(ref_rhs, 4) <= 1e-9, "oracle");
}

void ac7(Outcome& o) {
  const auto p = linear_params<double>(1.0, 0.01);
  const auto finf = boltzmann_gibbs(p);
  std::mt19937_64 rng(7);
  int poincare = 0, jb = 0;
  double worst_p = 0, worst_jb = 0;
  for (int k = 0; k < 50; ++k) {
    const auto r = random_perturbation(p, rng);
    const auto [a, b] = check_poincare(r);
    worst_p = std::max(worst_p, a / b);
    poincare += a > b * 1.01;

    const double eta = 0.8 / (r.values().array() / finf.values().array()).abs().maxCoeff();
    const GridFunction<double> f(p, finf.values() + eta * r.values());
    const double dh = hellinger(f, finf), fi = fisher(f, finf);
    worst_jb = std::max(worst_jb, dh * dh / fi);
    jb += dh * dh > fi * 1.01;
  }
  o.detail << "poincare violations=" << poincare << " (max ratio " << worst_p << ") johnson-barron violations=" << jb
           << " (max ratio " << worst_jb << ")";
  o.require(poincare == 0, "poincare");
  o.require(jb == 0, "johnson-barron");
}

void ac8(Outcome& o) {
  const int n_max = 200;
  const auto tr = integrate(delta_pmf<double>(5, n_max), 100.0, 0.01, 10);
  const auto g = geometric_equilibrium(5.0, n_max);
  double mass_drift = 0, mean_drift = 0, increase = -1;
  double prev = entropy_pmf(tr.states.front().pmf, g);
  for (const auto& s : tr.states) {
    mass_drift = std::max(mass_drift, std::abs(s.pmf.total() - 1));
    mean_drift = std::max(mean_drift, std::abs(s.pmf.mean() - 5));
    const double h = entropy_pmf(s.pmf, g);
    increase = std::max(increase, h - prev);
    prev = h;
  }
  const double dist = l1_distance(tr.states.back().pmf, g);
  o.detail << "mass drift=" << mass_drift << " mean drift=" << mean_drift << " max entropy increase=" << increase
           << " L1(t=100)=" << dist;
  o.require(mass_drift <= 1e-10 && mean_drift <= 1e-10, "drift");
  o.require(increase <= 0, "monotone");
  o.require(dist <= 0.01, "L1");
}

void ac9(Outcome& o) {
  const auto t0 = Clock::now();
  const double mu = 3, lambda = 2, t_end = 10;
  const int n_max = default_n_max(mu);
  // agents at rate lambda run on the mean-field clock scaled by lambda / 2
  const auto ode = integrate(delta_pmf<double>(3, n_max), lambda / 2 * t_end, 0.01, 1000000);
  const auto& target = ode.states.back().pmf;
  o.detail << "L1=";
  bool all = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto e = init_ensemble(100000, mu, InitMode::equal, seed);
    Rng rng(seed * 7919);
    run_discrete_until(e, t_end, rng, lambda);
    const double d = l1_distance(empirical_pmf(e), target);
    o.detail << d << " ";
    all = all && d <= 0.03;
  }
  const double secs = seconds_since(t0);
  o.detail << "runtime=" << secs << "s";
  o.require(all, "L1");
  o.require(secs <= 120, "runtime");
}

void ac10(Outcome& o) {
  const auto p = default_params<double>(1.0, 0.01);
  const auto f0 = gamma_initial(p);
  FpOptions<double> fo;
  fo.dt = 0.4 * p.h() * p.h();
  fo.t_end = 20 * fo.dt;
  fo.sample_times = {0, 10 * fo.dt, 20 * fo.dt};
  fo.entropy_rate = false;
  const auto rep = moment_ode_check(solve(f0, fo).rows, 2.0);
  const double fp2 = rel(rep.dm2_fd[0], rep.dm2_formula[0]);
  const double fp3 = rel(rep.dm3_fd[0], rep.dm3_formula[0]);

  // epsilon solver in kinetic time at rate lambda
  const double eps = 0.1, lambda = 2, dt = 0.02 / (lambda * (1 + mass(f0)));
  EpsilonStepper<double> st(p, eps, lambda, dt);
  GridFunction<double> f = f0;
  std::vector<double> t, m2, m3;
  for (int n = 0; n < 3; ++n) {
    t.push_back(n * dt);
    m2.push_back(moment(f, 2));
    m3.push_back(moment(f, 3));
    st.advance(f);
  }
  const auto exact = epsilon_moment_rates(f0, eps, lambda);
  const double eb2 = rel(detail::three_point_derivative(t, m2, 0), exact.dm2);
  const double eb3 = rel(detail::three_point_derivative(t, m3, 0), exact.dm3);
  o.detail << "fokker_planck rel err dM2=" << fp2 << " dM3=" << fp3 << "; eps_boltzmann rel err dM2=" << eb2
           << " dM3=" << eb3;
  o.require(fp2 <= 0.05 && fp3 <= 0.05, "fokker-planck");
  o.require(eb2 <= 0.05 && eb3 <= 0.05, "eps-boltzmann");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail.str() << std::endl;
  }
  return failures ? 1 : 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "nanorotor/errors.hpp"
#include "nanorotor/linear_analysis.hpp"
#include "nanorotor/lyapunov.hpp"
#include "nanorotor/runner.hpp"
#include "support.hpp"

using namespace nanorotor;
using test::relative;
namespace Q = nanorotor;

namespace {

struct Analysis {
  Setup setup;
  Environment env;
  LinearModel model;
  HybridModes modes;
  HeatingRates heating;
  CoolingReport report;
};

Analysis run(const ScenarioConfig& cfg) {
  const AnalysisResult r = analyze_scenario(cfg);
  return {cfg.setup(), cfg.environment, r.model, r.modes, r.heating, r.report};
}

Analysis run_row(int row) { return run(test::bundled("table1_row" + std::to_string(row))); }

}  // namespace

TEST_CASE("Hessians from the force and from the energy agree") {
  for (int row = 1; row <= 4; ++row) {
    CAPTURE(row);
    const Setup s = test::row_setup(row);
    const Equilibrium eq = find_equilibrium(s);
    const Matrix6d a = potential_hessian(s, eq.tweezer_minimum, eq.tweezer_cavity);
    const Matrix6d b = potential_hessian_from_energy(s, eq.tweezer_minimum, eq.tweezer_cavity);
    const double floor = 1e-9 * a.diagonal().cwiseAbs().maxCoeff();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double scale = std::max(std::sqrt(std::abs(a(i, i) * a(j, j))), floor);
        CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-5 * scale);
      }
  }
}

TEST_CASE("cavity blocks decouple at the tweezer minimum") {
  for (int row : {2, 4}) {
    CAPTURE(row);
    const Setup s = test::row_setup(row);
    const Equilibrium eq = find_equilibrium(s);
    const Matrix6d k = potential_hessian(s, eq.tweezer_minimum, eq.tweezer_cavity);
    for (int q = 0; q < 4; ++q)
      for (int p = 4; p < 6; ++p) CHECK(std::abs(k(q, p)) <= 1e-6 * std::sqrt(k(q, q) * k(p, p)));

    const LinearModel m = harmonic_expansion(s, eq);
    const double g1 = std::abs(m.coupling(0, x)) + std::abs(m.coupling(0, z));
    const double g2 = std::abs(m.coupling(1, beta)) + std::abs(m.coupling(1, Q::gamma));
    CHECK(g1 > 0.0);
    CHECK(g2 > 0.0);
    CHECK(std::abs(m.coupling(0, beta)) < 1e-6 * g1);
    CHECK(std::abs(m.coupling(0, Q::gamma)) < 1e-6 * g1);
    for (int q = 0; q < 4; ++q) CHECK(std::abs(m.coupling(1, q)) < 1e-6 * g2);
  }
}

TEST_CASE("row 4 steady state leaves the second cavity mode empty") {
  const Setup s = test::row_setup(4);
  const Equilibrium eq = find_equilibrium(s);
  CHECK(eq.residual < 1e-12);
  CHECK(std::abs(eq.cavity[1]) < 1e-9 * std::max(1.0, std::abs(eq.cavity[0])));
}

TEST_CASE("sphere librations are unconfined and reported at room temperature") {
  const Analysis a = run_row(1);
  for (int q : {alpha, beta, Q::gamma}) {
    CHECK_FALSE(a.model.confined[q]);
    CHECK(a.report.modes[q].room_temperature());
    CHECK(a.heating.recoil[q] == 0.0);
  }
}

TEST_CASE("linear polarization leaves gamma' held only by the cavity field") {
  auto cfg = test::bundled("table1_row4");
  const Analysis elliptic = run(cfg);
  cfg.tweezer.ellipticity = 0.0;
  const Analysis a = run(cfg);
  CHECK(a.heating.recoil[Q::gamma] == 0.0);
  CHECK(a.modes.modes[Q::gamma].frequency < 0.05 * elliptic.modes.modes[Q::gamma].frequency);
  REQUIRE(a.report.modes[Q::gamma].occupation.has_value());
  CHECK(*a.report.modes[Q::gamma].occupation > 1e4);
}

TEST_CASE("hybridization of a degenerate pair matches the Hamiltonian matrix") {
  LinearModel m;
  const double mass = 2.0, omega = 3.0, coupling = 1.5;
  m.metric = Matrix6d::Identity() * mass;
  m.mass = Vector6d::Constant(mass);
  m.confined = {false, false, false, false, true, true};
  m.frequency << 0, 0, 0, 0, omega, omega;
  m.stiffness(beta, beta) = m.stiffness(Q::gamma, Q::gamma) = mass * omega * omega;
  m.stiffness(beta, Q::gamma) = m.stiffness(Q::gamma, beta) = coupling;

  const HybridModes h = hybridize_modes(m);

  // H = p^2 / 2M + q K q / 2 -> dz/dt = [[0, M^-1], [-K, 0]] z, eigenvalues +-i omega
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity() / mass;
  a.bottomLeftCorner<2, 2>() << -mass * omega * omega, -coupling, -coupling, -mass * omega * omega;
  Eigen::EigenSolver<Eigen::Matrix4d> es(a);
  std::vector<double> w;
  for (int i = 0; i < 4; ++i)
    if (es.eigenvalues()[i].imag() > 0) w.push_back(es.eigenvalues()[i].imag());
  std::sort(w.begin(), w.end());
  REQUIRE(w.size() == 2);
  std::vector<double> got = {h.modes[beta].frequency, h.modes[Q::gamma].frequency};
  std::sort(got.begin(), got.end());
  CHECK(relative(got[0], w[0]) < 1e-12);
  CHECK(relative(got[1], w[1]) < 1e-12);

  m.stiffness(beta, Q::gamma) = m.stiffness(Q::gamma, beta) = 0.0;
  const HybridModes id = hybridize_modes(m);
  CHECK(id.modes[beta].frequency == doctest::Approx(omega).epsilon(1e-14));
  CHECK(id.max_mixing_angle == doctest::Approx(0.0));
}

TEST_CASE("a block that is not positive definite is a dark mode") {
  LinearModel m;
  m.metric = Matrix6d::Identity();
  m.mass = Vector6d::Ones();
  m.confined = {false, false, false, false, true, true};
  m.frequency << 0, 0, 0, 0, 1, 1;
  m.stiffness(beta, beta) = m.stiffness(Q::gamma, Q::gamma) = 1.0;
  m.stiffness(beta, Q::gamma) = m.stiffness(Q::gamma, beta) = 2.0;
  CHECK_THROWS_AS(hybridize_modes(m), DarkModeError);
}

TEST_CASE("rate-formula occupations agree with the Lyapunov covariance for weak coupling") {
  // row 2: all cooled modes; row 4: the block-2 librations
  const std::vector<std::pair<int, std::vector<int>>> cases = {{2, {z, alpha, beta, Q::gamma}}, {4, {beta, Q::gamma}}};
  for (const auto& [row, modes] : cases) {
    const Analysis a = run_row(row);
    const auto lyap = lyapunov_occupations(a.model, a.modes, a.heating);
    for (int q : modes) {
      CAPTURE(row);
      CAPTURE(q);
      REQUIRE(a.report.modes[q].occupation.has_value());
      REQUIRE(lyap[q].has_value());
      CHECK(a.report.modes[q].coupling < 0.2 * a.model.linewidth);
      CHECK(relative(*a.report.modes[q].occupation, *lyap[q]) < 0.05);
    }
  }
}

TEST_CASE("occupations do not depend on the global optical phase") {
  const Analysis a = run_row(4);
  for (double phase : {0.7, 2.9}) {
    LinearModel m = a.model;
    m.coupling *= std::polar(1.0, phase);
    m.cavity_derivative *= std::polar(1.0, phase);
    const HybridModes h = hybridize_modes(m);
    const CoolingReport r = build_report(a.setup, a.env, m, h);
    const auto lyap0 = lyapunov_occupations(a.model, a.modes, a.heating);
    const auto lyap1 = lyapunov_occupations(m, h, a.heating);
    for (int q = 0; q < 6; ++q) {
      REQUIRE(r.modes[q].occupation.has_value());
      CHECK(relative(*r.modes[q].occupation, *a.report.modes[q].occupation) < 1e-12);
      CHECK(relative(*lyap1[q], *lyap0[q]) < 1e-9);
    }
  }
}

TEST_CASE("row 4 hybrid modes stay close to the bare modes") {
  const Analysis a = run_row(4);
  for (const auto& mode : a.modes.modes) {
    CHECK(mode.confined);
    CHECK(mode.frequency > 0.0);
  }
  CHECK(a.modes.max_mixing_angle < 0.5);
  // bare-basis occupations stay close to the hybrid ones
  const CoolingReport bare = build_report(a.setup, a.env, a.model, bare_modes(a.model));
  for (int q = 0; q < 6; ++q) {
    REQUIRE(bare.modes[q].occupation.has_value());
    CHECK(relative(*bare.modes[q].occupation, *a.report.modes[q].occupation) < 0.2);
  }
}

TEST_CASE("gas damping from the kinetic formula") {
  const Setup s = test::row_setup(4);
  Environment env;
  env.pressure = 1e-7;  // 1e-9 mbar
  env.gas_temperature = 300.0;
  // 5 p l_b^2 sqrt(2 pi mu) / (6 m sqrt(kB T)), l_b = 70 nm, m = rho pi abc / 6
  const double mu = 4.002602 * 1.66053906660e-27;
  const double mass = 2329.0 * constants::pi / 6.0 * 69e-9 * 70e-9 * 71e-9;
  const double expected =
      5.0 * 1e-7 * 70e-9 * 70e-9 * std::sqrt(2.0 * constants::pi * mu) / (6.0 * mass * std::sqrt(1.380649e-23 * 300.0));
  CHECK(relative(gas_damping_constant(s, env), expected) < 1e-6);

  const LinearModel m = harmonic_expansion(s, find_equilibrium(s));
  const HeatingRates h1 = gas_heating(s, env, m);
  env.pressure *= 2.0;
  const HeatingRates h2 = gas_heating(s, env, m);
  env.pressure = 0.0;
  const HeatingRates h0 = gas_heating(s, env, m);
  for (int q = 0; q < 6; ++q) {
    CHECK(relative(h2.gas[q], 2.0 * h1.gas[q]) < 1e-14);
    CHECK(h0.gas[q] == 0.0);
  }
}

TEST_CASE("closed-form rate formulas") {
  CHECK(coherence_time(1000.0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(relative(torque_sensitivity(2e5, 3e-32, 400.0), 2.0 * torque_sensitivity(2e5, 3e-32, 100.0)) < 1e-14);
  CHECK(torque_sensitivity(2e5, 3e-32, 0.0) == 0.0);

  const double kappa = 2e6, omega = 4e5;
  const SidebandRates res = cooling_rates(1e4, omega, -omega, kappa);
  CHECK(relative(res.cooling / res.heating, (kappa * kappa + 4 * omega * omega) / (kappa * kappa)) < 1e-12);
  const SidebandRates none = cooling_rates(0.0, omega, -omega, kappa);
  CHECK(none.cooling == 0.0);
  CHECK(none.heating == 0.0);

  CHECK(*steady_state_occupation({5.0, 0.0}, 0.0) == 0.0);
  CHECK_FALSE(steady_state_occupation({1.0, 2.0}, 0.0).has_value());

  const double n = constants::boltzmann * 40.0 / (constants::hbar * omega);
  CHECK(std::abs(cooling_timescale(40.0, omega, n, {10.0, 1.0})) < 1e-15);
}

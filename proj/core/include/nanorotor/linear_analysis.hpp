#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nanorotor/optomech_core.hpp"

namespace nanorotor {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix26cd = Eigen::Matrix<cdouble, 2, 6>;

/// Mechanical coordinates q = (x, y, z, alpha, beta, gamma).
enum Coordinate : int { x = 0, y = 1, z = 2, alpha = 3, beta = 4, gamma = 5 };

inline constexpr std::array<std::string_view, 6> coordinate_names = {"x", "y", "z", "alpha", "beta", "gamma"};

/// Cavity mode (0 -> b_1, 1 -> b_2) each coordinate couples to:
/// S_1 = {x, y, z, alpha}, S_2 = {beta, gamma}.
constexpr int block_of(int q) { return q < 4 ? 0 : 1; }

struct Environment {
  double pressure = 1e-7;                 // Pa
  double gas_temperature = 300.0;         // K
  double gas_mass = constants::helium_mass;
  double initial_temperature = 40.0;      // T_0 for cooling timescales
  double translational_gas_factor = 1.0;  // scales the gas damping of x, y, z
};

/// Tweezer minimum q_tw = (0, 0, 0, -zeta, pi/2, 0).
Vector6d tweezer_minimum(const Setup& s);

Orientation orientation_of(const Vector6d& q);

/// Kinetic metric M(q): m on the translations, G(Omega) on the Euler angles.
Matrix6d kinetic_metric(const Setup& s, const Vector6d& q);

/// Generalized force -dV/dq (+ radiation force and torque if requested),
/// with the torque projected onto Euler-angle rates.
Vector6d generalized_force(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b, bool radiation);

double potential_at(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b);

/// Hessian of V_opt at fixed b from finite differences of the analytic
/// generalized force (4th-order stencil + one Richardson step).
Matrix6d potential_hessian(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b);

/// Same Hessian from second differences of the energy alone.
Matrix6d potential_hessian_from_energy(const Setup& s, const Vector6d& q, const Eigen::Vector2cd& b);

struct Equilibrium {
  Vector6d tweezer_minimum = Vector6d::Zero();
  Eigen::Vector2cd tweezer_cavity = Eigen::Vector2cd::Zero();
  Vector6d position = Vector6d::Zero();
  Eigen::Vector2cd cavity = Eigen::Vector2cd::Zero();
  std::array<bool, 6> confined{};
  double residual = 0.0;
  int iterations = 0;
};

struct EquilibriumOptions {
  double tolerance = 1e-12;
  int max_iterations = 60;
  bool radiation = true;
};

/// Joint root of the mechanical force/torque balance and db/dt = 0, by
/// damped Newton iteration seeded at the tweezer minimum. Coordinates
/// without confinement are held at their tweezer-minimum values.
Equilibrium find_equilibrium(const Setup& s, const EquilibriumOptions& options = {});

/// Where the quadratic expansion is taken. The tweezer minimum with its
/// steady cavity field is the reference point of the linearized model;
/// the equilibrium option follows the radiation-displaced configuration.
enum class ExpansionPoint { tweezer_minimum, equilibrium };

struct LinearModel {
  Equilibrium equilibrium;
  ExpansionPoint point = ExpansionPoint::tweezer_minimum;
  Vector6d origin = Vector6d::Zero();                  // expansion point in q
  Eigen::Vector2cd cavity_origin = Eigen::Vector2cd::Zero();
  Matrix6d stiffness = Matrix6d::Zero();  // d^2 V / dq dq'
  Matrix6d metric = Matrix6d::Zero();     // kinetic metric at q_eq
  Vector6d mass = Vector6d::Zero();       // m_q = 1 / (M^-1)_qq
  Vector6d frequency = Vector6d::Zero();  // omega_q
  Vector6d zero_point = Vector6d::Zero(); // q_zp
  std::array<bool, 6> confined{};
  Matrix26cd cavity_derivative = Matrix26cd::Zero();  // d_q d_{b_j} V
  Matrix26cd coupling = Matrix26cd::Zero();           // g_jq
  Matrix6d mechanical_coupling = Matrix6d::Zero();    // g_qq'
  Eigen::Vector2d block_detuning = Eigen::Vector2d::Zero();
  double linewidth = 0.0;
};

LinearModel harmonic_expansion(const Setup& s, const Equilibrium& eq,
                               ExpansionPoint point = ExpansionPoint::tweezer_minimum);

struct HybridMode {
  std::string label;  // e.g. "x'"
  int dominant = 0;   // bare coordinate with the largest overlap
  int block = 0;
  bool confined = false;
  double frequency = 0.0;
  cdouble coupling{};  // g_Q
  Vector6d shape = Vector6d::Zero();  // M-normalized eigenvector in q-space
  double overlap = 0.0;               // mass-weighted overlap with the dominant bare mode
};

/// Six hybrid modes, indexed by their dominant bare coordinate.
struct HybridModes {
  std::array<HybridMode, 6> modes;
  double max_mixing_angle = 0.0;
};

/// Normal modes of each block's quadratic form (K v = omega^2 M v), with
/// couplings to the block's cavity mode. Throws DarkModeError if a
/// confined block is not positive definite.
HybridModes hybridize_modes(const LinearModel& model);

/// Modes equal to the bare coordinates (no cavity-mediated mixing).
HybridModes bare_modes(const LinearModel& model);

struct HeatingRates {
  Vector6d recoil = Vector6d::Zero();
  Vector6d gas = Vector6d::Zero();
  Vector6d gas_damping = Vector6d::Zero();  // gamma^gas per coordinate
  Vector6d total() const { return recoil + gas; }
};

/// Photon-recoil phonon heating rates for the bare coordinates.
Vector6d recoil_heating(const Setup& s, const LinearModel& model);

/// Gas damping constant 5 p l_b^2 sqrt(2 pi mu) / (6 m sqrt(k_B T_g)).
double gas_damping_constant(const Setup& s, const Environment& env);

HeatingRates gas_heating(const Setup& s, const Environment& env, const LinearModel& model);

HeatingRates heating_rates(const Setup& s, const Environment& env, const LinearModel& model);

/// Bare-coordinate momentum diffusion projected onto the hybrid modes.
Vector6d hybrid_heating(const LinearModel& model, const HybridModes& hybrid, const Vector6d& bare_rates);

struct SidebandRates {
  double cooling = 0.0;  // gamma^-
  double heating = 0.0;  // gamma^+
};

/// gamma^-+ = 2 |g|^2 kappa / [kappa^2 + (Delta_j +- omega)^2].
SidebandRates cooling_rates(double coupling_magnitude, double frequency, double detuning, double linewidth);

/// n = (gamma^+ + xi) / (gamma^- - gamma^+); nullopt when not cooled.
std::optional<double> steady_state_occupation(const SidebandRates& rates, double heating);

/// log(k_B T_0 / hbar omega n) / (gamma^- - gamma^+).
double cooling_timescale(double initial_temperature, double frequency, double occupation, const SidebandRates& rates);

double coherence_time(double heating);

/// sqrt(4 hbar omega I xi), in N m / sqrt(Hz).
double torque_sensitivity(double frequency, double moment_of_inertia, double heating);

struct ModeReport {
  std::string label;
  int block = 0;
  bool confined = false;
  double frequency = 0.0;
  double coupling = 0.0;  // |g_Q|
  SidebandRates rates;
  double recoil_heating = 0.0;
  double gas_heating = 0.0;
  double heating = 0.0;
  std::optional<double> occupation;  // nullopt -> room temperature
  double cooling_time = 0.0;         // NaN when not cooled
  double coherence_time = 0.0;
  bool weak_coupling = true;
  bool room_temperature() const { return !occupation.has_value(); }
};

struct CoolingReport {
  std::array<ModeReport, 6> modes;
  Equilibrium equilibrium;
  double torque_sensitivity = 0.0;
  bool weak_coupling = true;
  std::vector<std::string> warnings;
};

struct AnalysisOptions {
  bool hybridize = true;
  ExpansionPoint point = ExpansionPoint::tweezer_minimum;
};

/// Full pipeline: equilibrium, expansion, hybridization, rates, occupations.
CoolingReport analyze(const Setup& s, const Environment& env, const AnalysisOptions& options = {});

CoolingReport build_report(const Setup& s, const Environment& env, const LinearModel& model,
                           const HybridModes& hybrid);

}  // namespace nanorotor

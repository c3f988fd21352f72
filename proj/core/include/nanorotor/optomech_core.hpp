#pragma once

#include <array>

#include <Eigen/Core>

#include "nanorotor/optical_fields.hpp"
#include "nanorotor/particle_geometry.hpp"

namespace nanorotor {

struct OpticalConstants {
  double coupling = 0.0;    // U_0 = -omega V / 2 V_c  (rad/s)
  double scattering = 0.0;  // gamma_sc = omega k^3 V^2 / 6 pi V_c  (rad/s)
};

/// Particle, fields and derived constants for one parameter point.
struct Setup {
  Ellipsoid particle;
  MaterialResponse material;
  FieldModel fields;
  double tweezer_amplitude = 0.0;  // epsilon
  OpticalConstants optical;

  static Setup create(const Ellipsoid& particle, const TweezerConfig& tweezer, const CavityConfig& cavity);

  double wavenumber() const { return fields.wavenumber; }
  double laser_frequency() const { return fields.tweezer.angular_frequency(); }
  const CavityConfig& cavity() const { return fields.cavity; }
  const TweezerConfig& tweezer() const { return fields.tweezer; }
};

struct MechanicalState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d momentum = Eigen::Vector3d::Zero();
  Orientation orientation;
  Eigen::Vector3d angular_momentum = Eigen::Vector3d::Zero();  // body frame
  Eigen::Vector2cd cavity = Eigen::Vector2cd::Zero();
  double time = 0.0;

  bool finite() const;
};

inline constexpr std::size_t state_dimension = 17;
using StateVector = std::array<double, state_dimension>;

StateVector pack(const MechanicalState& s);
MechanicalState unpack(const StateVector& v, double time = 0.0);

/// Which non-conservative pieces enter the dynamics.
struct DynamicsOptions {
  bool radiation = true;  // radiation force/torque and gamma_sc terms in eta, kappa_eff
  bool cavity = true;     // evolve b; when false b is frozen
};

/// V_opt = -(eps0 V / 4) E* . chi E. Throws ConsistencyError if the
/// quadratic form comes out non-real beyond rounding.
double optical_potential(const Setup& s, const Eigen::Vector3d& r, const Orientation& o, const Eigen::Vector2cd& b);

/// -grad_R V_opt.
Eigen::Vector3d conservative_force(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                   const Eigen::Vector2cd& b);

/// Space-frame torque -dV_opt/d(theta) = (eps0 V / 2) Re[(chi E*) x E].
Eigen::Vector3d conservative_torque(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                    const Eigen::Vector2cd& b);

Eigen::Vector3d radiation_force(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                const Eigen::Vector2cd& b);

Eigen::Vector3d radiation_torque(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                 const Eigen::Vector2cd& b);

/// [eta]_j = -eps e_j . (i U_0 chi + gamma_sc chi^2 / 2) e_t f_c f_t.
Eigen::Vector2cd cavity_drive(const Setup& s, const Eigen::Vector3d& r, const Orientation& o, bool scattering = true);

Eigen::Matrix2d effective_detuning(const Setup& s, const Eigen::Vector3d& r, const Orientation& o);

Eigen::Matrix2d effective_linewidth(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                    bool scattering = true);

/// Fixed point of db/dt = (i Delta_eff - kappa_eff) b + eta at fixed mechanics.
Eigen::Vector2cd steady_cavity_amplitudes(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                          bool scattering = true);

/// dV_opt/db_j at fixed b* (Wirtinger derivative).
Eigen::Vector2cd potential_cavity_derivative(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                             const Eigen::Vector2cd& b);

struct StateRate {
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d force = Eigen::Vector3d::Zero();
  Eigen::Vector4d quaternion_rate = Eigen::Vector4d::Zero();  // (w, x, y, z)
  Eigen::Vector3d body_torque = Eigen::Vector3d::Zero();      // dJ/dt, body frame, incl. gyroscopic term
  Eigen::Vector2cd cavity_rate = Eigen::Vector2cd::Zero();
};

/// Deterministic coupled particle-cavity dynamics.
StateRate equations_of_motion(const Setup& s, const MechanicalState& state, const DynamicsOptions& options = {});

void equations_of_motion(const Setup& s, const StateVector& x, StateVector& dxdt, const DynamicsOptions& options = {});

/// Conserved quantity of the conservative dynamics (no radiation terms,
/// kappa = 0): kinetic energy + V_opt - hbar Delta |b|^2.
double hamiltonian(const Setup& s, const MechanicalState& state);

double kinetic_energy(const Setup& s, const MechanicalState& state);

/// Cooling is guaranteed for Delta < U_0 chi_c.
bool stability_check(double detuning, double coupling, double max_susceptibility);
bool stability_check(const Setup& s);

}  // namespace nanorotor

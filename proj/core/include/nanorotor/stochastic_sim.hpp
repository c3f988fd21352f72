#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nanorotor/linear_analysis.hpp"
#include "nanorotor/lyapunov.hpp"
#include "nanorotor/optomech_core.hpp"

namespace nanorotor {

/// Damping and white-noise diffusion added to the deterministic dynamics.
/// Diffusion constants D are per momentum component, d<p^2>/dt = 2 D.
/// Rotational entries refer to the body axes (a, b, c).
struct NoiseModel {
  Eigen::Vector3d translational_damping = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotational_damping = Eigen::Vector3d::Zero();
  Eigen::Vector3d translational_diffusion = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotational_diffusion = Eigen::Vector3d::Zero();
  double linewidth = 0.0;     // kappa of the cavity input noise
  double cavity_noise = 0.0;  // 1 = symmetrized vacuum
};

/// Gas damping with fluctuation-dissipation noise at T_g plus recoil
/// diffusion D_q = hbar m_q omega_q xi_q^rec. Librations alpha, beta,
/// gamma map onto the body a, b, c axes as they do at the tweezer minimum.
NoiseModel noise_model(const Setup& s, const Environment& env, const LinearModel& model, double cavity_noise = 1.0);

/// Gas only: thermal damping of every momentum, no recoil, no cavity noise.
NoiseModel gas_noise(const Setup& s, const Environment& env);

struct SimulationOptions {
  double dt = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 1;
  int sample_stride = 1;
  DynamicsOptions dynamics;
};

struct Trajectory {
  double dt = 0.0;  // sample interval
  std::uint64_t seed = 0;
  std::vector<double> time;
  std::vector<StateVector> states;
  std::size_t size() const { return states.size(); }
};

using TrajectoryObserver = std::function<void(double time, const StateVector& state)>;

/// Largest step that resolves the fastest rate of the setup:
/// 2 pi / (20 max(omega_q, kappa, |Delta|)).
double max_time_step(const Setup& s, const LinearModel& model);

/// Strang splitting: exact Ornstein-Uhlenbeck half-kicks on the momenta and
/// cavity-noise half-kicks around one RK4 step of the deterministic
/// dynamics, with the quaternion renormalized after every step. The
/// observer sees the initial state and every sample_stride-th step.
/// Throws IntegrationError when the state stops being finite.
void integrate(const MechanicalState& initial, const Setup& s, const NoiseModel& noise,
               const SimulationOptions& options, const TrajectoryObserver& observer);

Trajectory integrate_trajectory(const MechanicalState& initial, const Setup& s, const NoiseModel& noise,
                                const SimulationOptions& options);

/// Small-amplitude coordinates about the equilibrium: dq, generalized
/// momenta p (p_Omega = J_b^T L_body) and db = b - b_eq.
struct ModeCoordinates {
  Vector6d dq = Vector6d::Zero();
  Vector6d p = Vector6d::Zero();
  Eigen::Vector2cd db = Eigen::Vector2cd::Zero();
};

ModeCoordinates mode_coordinates(const LinearModel& model, const MechanicalState& state);

/// Inverse of mode_coordinates.
MechanicalState state_from_modes(const Setup& s, const LinearModel& model, const ModeCoordinates& c);

/// Phonon proxy E_Q / (hbar omega_Q) - 1/2 per hybrid mode (NaN if unconfined).
std::array<double, 6> phonon_proxy(const LinearModel& model, const HybridModes& modes, const MechanicalState& state);

/// Draws a state from the steady Gaussian of the linearized model. Modes
/// that are not cooled (report shows no occupation) start at rest.
MechanicalState sample_steady_state(const Setup& s, const LinearModel& model, const HybridModes& modes,
                                    const HeatingRates& heating, const CoolingReport& report, std::uint64_t seed);

struct OccupationEstimate {
  std::array<double, 6> mean{};
  std::array<double, 6> error{};  // standard error from batch means
};

/// Time-averaged phonon proxies after discarding burn_in of the samples.
OccupationEstimate estimate_occupations(const LinearModel& model, const HybridModes& modes, const Trajectory& traj,
                                        double burn_in = 0.2, int batches = 20);

/// Exact discretization of a linear block system (Van Loan) sampled every
/// dt for `steps` steps from the origin; returns the sample covariance of
/// the scaled state after discarding the first 10% of the steps.
Eigen::MatrixXd simulate_linearized_covariance(const LinearSystem& system, double dt, std::size_t steps,
                                               std::uint64_t seed);

}  // namespace nanorotor

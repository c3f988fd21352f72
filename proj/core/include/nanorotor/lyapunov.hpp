#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nanorotor/linear_analysis.hpp"

namespace nanorotor {

/// Linearized Langevin system of one cavity block,
///   dx = A x dt + sqrt(D) dW,   x = [dq, p, Re db, Im db],
/// in scaled variables dq / q_zp and p / p_zp (p_zp = hbar / 2 q_zp) so
/// that all entries are O(1). Unconfined coordinates are left out.
struct LinearSystem {
  int block = 0;
  std::vector<int> coordinates;
  Eigen::MatrixXd drift;
  Eigen::MatrixXd diffusion;
  Eigen::VectorXd scale;  // physical = scale .* scaled
  int size() const { return static_cast<int>(drift.rows()); }
  int mechanical() const { return static_cast<int>(coordinates.size()); }
};

/// Builds the block system. Momentum diffusion is 2 hbar m_q omega_q xi_q
/// (recoil plus gas), gas damping acts on the momenta, and the cavity
/// quadratures receive symmetrized vacuum noise kappa / 2 each.
LinearSystem linear_system(const LinearModel& model, const HeatingRates& heating, int block);

/// Solves A S + S A^T + D = 0 (A Hurwitz). Throws PhysicsError otherwise.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& drift, const Eigen::MatrixXd& diffusion);

/// Steady covariance of the scaled state.
Eigen::MatrixXd steady_covariance(const LinearSystem& system);

/// Symmetrized mode occupations (<P^2> + omega^2 <X^2>) / (2 hbar omega) - 1/2
/// from a scaled covariance, with X_Q = v^T M dq and P_Q = v^T p. Entries
/// for modes outside the block stay empty.
std::array<std::optional<double>, 6> covariance_occupations(const LinearModel& model, const HybridModes& modes,
                                                            const LinearSystem& system,
                                                            const Eigen::MatrixXd& covariance);

/// Lyapunov occupations of every confined mode in both blocks.
std::array<std::optional<double>, 6> lyapunov_occupations(const LinearModel& model, const HybridModes& modes,
                                                          const HeatingRates& heating);

}  // namespace nanorotor

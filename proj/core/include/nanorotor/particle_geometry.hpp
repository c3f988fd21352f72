#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nanorotor/constants.hpp"

namespace nanorotor {

/// Homogeneous dielectric ellipsoid. Diameters are sorted ascending
/// (l_a <= l_b <= l_c); the a-axis is the short one.
struct Ellipsoid {
  std::array<double, 3> diameters{};  // m
  double density = constants::silicon_density;
  double permittivity = constants::silicon_permittivity;

  /// Throws ConfigError when ordering, positivity or permittivity is violated.
  void validate() const;
  std::array<double, 3> semi_axes() const;
};

struct MaterialResponse {
  double volume = 0.0;
  double mass = 0.0;
  Eigen::Vector3d inertia = Eigen::Vector3d::Zero();         // (I_a, I_b, I_c)
  Eigen::Vector3d susceptibility = Eigen::Vector3d::Zero();  // (chi_a, chi_b, chi_c)
};

/// Rigid-body orientation. Stored as a unit quaternion whose rotation maps
/// body (principal-axis) coordinates into the space frame; Euler angles use
/// the z-y'-z'' convention, R = Rz(alpha) Ry(beta) Rz(gamma).
class Orientation {
 public:
  Orientation() = default;
  explicit Orientation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}

  static Orientation from_euler(double alpha, double beta, double gamma);
  static Orientation from_euler(const Eigen::Vector3d& angles) {
    return from_euler(angles[0], angles[1], angles[2]);
  }

  /// (alpha, beta, gamma) with beta in [0, pi] and alpha, gamma in (-pi, pi].
  Eigen::Vector3d euler() const;
  const Eigen::Quaterniond& quaternion() const noexcept { return q_; }
  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }

  void renormalize() { q_.normalize(); }

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

/// Depolarization factors (L_a, L_b, L_c) of the ellipsoid. Evaluated by
/// adaptive Gauss-Kronrod quadrature after mapping t = s_c^2 tan^2 u onto a
/// finite interval. Throws QuadratureError if the relative error estimate
/// exceeds `tolerance`.
Eigen::Vector3d depolarization_factors(const Ellipsoid& e, double tolerance = 1e-12);

/// chi_i = (eps_r - 1) / (1 + L_i (eps_r - 1)).
Eigen::Vector3d principal_susceptibilities(const Ellipsoid& e);

MaterialResponse material_response(const Ellipsoid& e);

Eigen::Matrix3d rotation_matrix(const Orientation& o);

/// chi(Omega) = R chi_0 R^T.
Eigen::Matrix3d susceptibility_tensor(const Orientation& o, const Eigen::Vector3d& principal);

/// Space-frame angular velocity per unit Euler rate: omega = J_s(Omega) dOmega/dt.
/// Columns are e_z, Rz(alpha) e_y and R(Omega) e_z.
Eigen::Matrix3d euler_rate_jacobian_space(const Eigen::Vector3d& angles);

/// Body-frame counterpart R^T J_s.
Eigen::Matrix3d euler_rate_jacobian_body(const Eigen::Vector3d& angles);

/// Kinetic metric G = J_b^T diag(I) J_b of the Euler-angle coordinates, so
/// that T = (1/2) dOmega^T G dOmega.
Eigen::Matrix3d rotational_metric(const Eigen::Vector3d& angles, const Eigen::Vector3d& inertia);

}  // namespace nanorotor

#include "nanorotor/particle_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nanorotor/errors.hpp"

namespace nanorotor {

void Ellipsoid::validate() const {
  for (double d : diameters) {
    if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("ellipsoid diameters must be positive and finite");
  }
  if (diameters[0] > diameters[1] || diameters[1] > diameters[2]) {
    throw ConfigError("ellipsoid diameters must be ordered l_a <= l_b <= l_c");
  }
  if (!(density > 0.0)) throw ConfigError("density must be positive");
  if (!(permittivity > 1.0)) throw ConfigError("relative permittivity must exceed 1");
}

std::array<double, 3> Ellipsoid::semi_axes() const {
  return {diameters[0] / 2.0, diameters[1] / 2.0, diameters[2] / 2.0};
}

Orientation Orientation::from_euler(double alpha, double beta, double gamma) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(gamma, Eigen::Vector3d::UnitZ());
  return Orientation(q);
}

Eigen::Vector3d Orientation::euler() const {
  const Eigen::Matrix3d r = matrix();
  const double beta = std::acos(std::clamp(r(2, 2), -1.0, 1.0));
  double alpha = 0.0;
  double gamma = 0.0;
  if (std::abs(std::sin(beta)) > 1e-12) {
    alpha = std::atan2(r(1, 2), r(0, 2));
    gamma = std::atan2(r(2, 1), -r(2, 0));
  } else {
    // Gimbal lock: only alpha +- gamma is defined, put everything into alpha.
    alpha = std::atan2(r(1, 0), r(0, 0));
  }
  return {alpha, beta, gamma};
}

Eigen::Vector3d depolarization_factors(const Ellipsoid& e, double tolerance) {
  e.validate();
  const auto s = e.semi_axes();
  // Scale by the largest semi-axis so the integrand is O(1).
  const double sc = s[2];
  const std::array<double, 3> a2 = {(s[0] / sc) * (s[0] / sc), (s[1] / sc) * (s[1] / sc), 1.0};
  const double prefactor = (s[0] / sc) * (s[1] / sc) / 2.0;

  Eigen::Vector3d factors;
  for (int i = 0; i < 3; ++i) {
    auto integrand = [&](double u) {
      const double t = std::tan(u);
      const double t2 = t * t;
      const double sec2 = 1.0 + t2;
      const double root = std::sqrt((t2 + a2[0]) * (t2 + a2[1]) * (t2 + a2[2]));
      return 2.0 * t * sec2 / ((t2 + a2[i]) * root);
    };
    // Split where t crosses the smaller squared semi-axes; the integrand
    // bends sharply there for needle- and disc-like shapes.
    std::array<double, 4> edges = {0.0, std::atan(s[0] / sc), std::atan(s[1] / sc), constants::pi / 2.0};
    double value = 0.0;
    double error = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (!(edges[k + 1] > edges[k])) continue;
      double piece_error = 0.0;
      value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, edges[k], edges[k + 1], 15,
                                                                            tolerance, &piece_error);
      error += piece_error;
    }
    if (!(error <= tolerance * std::abs(value)) || !std::isfinite(value)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "depolarization integral did not converge (axis %d, relative error %.3g)", i,
                    error / std::abs(value));
      throw QuadratureError(buf);
    }
    factors[i] = prefactor * value;
  }
  return factors;
}

Eigen::Vector3d principal_susceptibilities(const Ellipsoid& e) {
  const Eigen::Vector3d depol = depolarization_factors(e);
  const double contrast = e.permittivity - 1.0;
  return contrast * (1.0 + contrast * depol.array()).inverse();
}

MaterialResponse material_response(const Ellipsoid& e) {
  e.validate();
  MaterialResponse m;
  const auto& l = e.diameters;
  m.volume = constants::pi * l[0] * l[1] * l[2] / 6.0;
  m.mass = e.density * m.volume;
  m.inertia = {m.mass * (l[1] * l[1] + l[2] * l[2]) / 20.0,
               m.mass * (l[0] * l[0] + l[2] * l[2]) / 20.0,
               m.mass * (l[0] * l[0] + l[1] * l[1]) / 20.0};
  m.susceptibility = principal_susceptibilities(e);
  return m;
}

Eigen::Matrix3d rotation_matrix(const Orientation& o) { return o.matrix(); }

Eigen::Matrix3d susceptibility_tensor(const Orientation& o, const Eigen::Vector3d& principal) {
  const Eigen::Matrix3d r = o.matrix();
  Eigen::Matrix3d chi = r * principal.asDiagonal() * r.transpose();
  return 0.5 * (chi + chi.transpose());
}

Eigen::Matrix3d euler_rate_jacobian_space(const Eigen::Vector3d& angles) {
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(angles[0], Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d r = Orientation::from_euler(angles).matrix();
  Eigen::Matrix3d j;
  j.col(0) = Eigen::Vector3d::UnitZ();
  j.col(1) = rz * Eigen::Vector3d::UnitY();
  j.col(2) = r * Eigen::Vector3d::UnitZ();
  return j;
}

Eigen::Matrix3d euler_rate_jacobian_body(const Eigen::Vector3d& angles) {
  return Orientation::from_euler(angles).matrix().transpose() * euler_rate_jacobian_space(angles);
}

Eigen::Matrix3d rotational_metric(const Eigen::Vector3d& angles, const Eigen::Vector3d& inertia) {
  const Eigen::Matrix3d jb = euler_rate_jacobian_body(angles);
  return jb.transpose() * inertia.asDiagonal() * jb;
}

}  // namespace nanorotor

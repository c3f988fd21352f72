#pragma once

#include <complex>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "nanorotor/constants.hpp"

namespace nanorotor {

using cdouble = std::complex<double>;

/// How a single Rayleigh range is assigned to the elliptic focus.
enum class RayleighConvention {
  geometric_mean,  // z_R = k w_x w_y / 2
  major_axis,      // z_R = k max(w_x, w_y)^2 / 2
  minor_axis,      // z_R = k min(w_x, w_y)^2 / 2
};

struct TweezerConfig {
  double power = 0.0;          // W
  double wavelength = 1550e-9;  // m, vacuum
  double waist_x = 0.0;         // m
  double waist_y = 0.0;         // m
  double ellipticity = 0.0;     // psi in [0, pi/4]
  double rotation = 0.0;        // zeta
  RayleighConvention rayleigh = RayleighConvention::geometric_mean;

  double wavenumber() const { return constants::two_pi / wavelength; }
  double angular_frequency() const { return constants::speed_of_light * wavenumber(); }
  double rayleigh_range() const;
  void validate() const;
};

struct CavityConfig {
  double length = 0.0;      // m
  double waist = 0.0;       // m
  double linewidth = 0.0;   // kappa, rad/s (amplitude decay rate)
  double detuning = 0.0;    // Delta = omega - omega_c, rad/s
  double axis_angle = 0.0;  // theta, angle between the cavity axis and e_y
  double phase = 0.0;       // phi

  /// Gaussian standing-wave mode volume pi w_c^2 L / 4.
  double mode_volume() const { return constants::pi * waist * waist * length / 4.0; }
  void validate() const;
};

struct PolarizationBasis {
  Eigen::Vector3cd tweezer;   // e_t = cos(psi) e_t1 + i sin(psi) e_t2
  Eigen::Vector3d tweezer_major;  // e_t1
  Eigen::Vector3d tweezer_minor;  // e_t2
  Eigen::Vector3d cavity1;    // e_1 = cos(theta) e_x - sin(theta) e_y
  Eigen::Vector3d cavity2;    // e_2 = e_z
  Eigen::Vector3d cavity_axis() const { return cavity2.cross(cavity1); }
};

PolarizationBasis make_polarization_basis(double axis_angle, double ellipticity, double rotation);

struct TweezerModeSample {
  cdouble value;
  Eigen::Vector3cd gradient;
};

struct CavityModeSample {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

/// Complex electric field amplitude (field = Re[E e^{-i omega t}]) and its
/// gradient, gradient(i, k) = d_i E_k.
struct FieldSample {
  Eigen::Vector3cd field = Eigen::Vector3cd::Zero();
  Eigen::Matrix3cd gradient = Eigen::Matrix3cd::Zero();
};

/// Elliptic paraxial Gaussian focused at the origin, propagating along +z:
/// f_t = exp(ikz) exp[-(x^2/w_x^2 + y^2/w_y^2)/(1 + i z/z_R)] / (1 + i z/z_R),
/// which equals exp[-(..)/r^2(z)] exp{i[kz - phi_t]}/r(z) with the Gouy and
/// wavefront-curvature phase in phi_t.
TweezerModeSample tweezer_mode(const Eigen::Vector3d& r, const TweezerConfig& tweezer);

/// Standing wave cos[k (e_2 x e_1).r + phi].
CavityModeSample cavity_mode(const Eigen::Vector3d& r, const PolarizationBasis& basis, double wavenumber,
                             double phase);

/// Dimensionless tweezer amplitude such that the focal field |E(0)|^2 equals
/// 4P/(pi eps0 c w_x w_y).
double tweezer_amplitude_from_power(double power, const TweezerConfig& tweezer, const CavityConfig& cavity);

/// Everything needed to evaluate the total field at a point.
struct FieldModel {
  TweezerConfig tweezer;
  CavityConfig cavity;
  PolarizationBasis basis;
  double wavenumber = 0.0;
  double field_scale = 0.0;  // sqrt(2 hbar omega / eps0 V_c)

  static FieldModel create(const TweezerConfig& tweezer, const CavityConfig& cavity);
};

/// E = sqrt(2 hbar omega / eps0 V_c) [eps e_t f_t + sum_j b_j e_j f_c].
FieldSample total_field(const Eigen::Vector3d& r, double tweezer_amplitude, const Eigen::Vector2cd& cavity_amplitudes,
                        const FieldModel& model);

}  // namespace nanorotor

#include "nanorotor/optical_fields.hpp"

#include <algorithm>
#include <cmath>

#include "nanorotor/errors.hpp"

namespace nanorotor {

double TweezerConfig::rayleigh_range() const {
  const double k = wavenumber();
  switch (rayleigh) {
    case RayleighConvention::major_axis: {
      const double w = std::max(waist_x, waist_y);
      return k * w * w / 2.0;
    }
    case RayleighConvention::minor_axis: {
      const double w = std::min(waist_x, waist_y);
      return k * w * w / 2.0;
    }
    case RayleighConvention::geometric_mean:
      break;
  }
  return k * waist_x * waist_y / 2.0;
}

void TweezerConfig::validate() const {
  if (!(power >= 0.0)) throw ConfigError("tweezer power must be non-negative");
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  if (!(waist_x > 0.0) || !(waist_y > 0.0)) throw ConfigError("tweezer waists must be positive");
  if (ellipticity < 0.0 || ellipticity > constants::pi / 4.0 + 1e-15) {
    throw ConfigError("ellipticity psi must lie in [0, pi/4]");
  }
}

void CavityConfig::validate() const {
  if (!(length > 0.0) || !(waist > 0.0)) throw ConfigError("cavity length and waist must be positive");
  if (!(linewidth >= 0.0)) throw ConfigError("cavity linewidth must be non-negative");
}

PolarizationBasis make_polarization_basis(double axis_angle, double ellipticity, double rotation) {
  PolarizationBasis b;
  b.cavity1 = {std::cos(axis_angle), -std::sin(axis_angle), 0.0};
  b.cavity2 = Eigen::Vector3d::UnitZ();
  b.tweezer_major = {std::cos(rotation), -std::sin(rotation), 0.0};
  b.tweezer_minor = {std::sin(rotation), std::cos(rotation), 0.0};
  b.tweezer = std::cos(ellipticity) * b.tweezer_major.cast<cdouble>() +
              cdouble(0.0, std::sin(ellipticity)) * b.tweezer_minor.cast<cdouble>();
  return b;
}

TweezerModeSample tweezer_mode(const Eigen::Vector3d& r, const TweezerConfig& tweezer) {
  const double k = tweezer.wavenumber();
  const double zr = tweezer.rayleigh_range();
  const double wx2 = tweezer.waist_x * tweezer.waist_x;
  const double wy2 = tweezer.waist_y * tweezer.waist_y;
  const double rho2 = r.x() * r.x() / wx2 + r.y() * r.y() / wy2;
  const cdouble q(1.0, r.z() / zr);  // 1 + i z/z_R
  const cdouble i(0.0, 1.0);

  TweezerModeSample s;
  s.value = std::exp(i * k * r.z() - rho2 / q) / q;
  s.gradient[0] = -2.0 * r.x() / (wx2 * q) * s.value;
  s.gradient[1] = -2.0 * r.y() / (wy2 * q) * s.value;
  s.gradient[2] = (i * k + rho2 * (i / zr) / (q * q) - (i / zr) / q) * s.value;
  return s;
}

CavityModeSample cavity_mode(const Eigen::Vector3d& r, const PolarizationBasis& basis, double wavenumber,
                             double phase) {
  const Eigen::Vector3d axis = basis.cavity_axis();
  const double arg = wavenumber * axis.dot(r) + phase;
  return {std::cos(arg), -wavenumber * std::sin(arg) * axis};
}

double tweezer_amplitude_from_power(double power, const TweezerConfig& tweezer, const CavityConfig& cavity) {
  using namespace constants;
  const double focal_intensity =
      4.0 * power / (pi * vacuum_permittivity * speed_of_light * tweezer.waist_x * tweezer.waist_y);
  return std::sqrt(vacuum_permittivity * cavity.mode_volume() * focal_intensity /
                   (2.0 * hbar * tweezer.angular_frequency()));
}

FieldModel FieldModel::create(const TweezerConfig& tweezer, const CavityConfig& cavity) {
  FieldModel m;
  m.tweezer = tweezer;
  m.cavity = cavity;
  m.basis = make_polarization_basis(cavity.axis_angle, tweezer.ellipticity, tweezer.rotation);
  m.wavenumber = tweezer.wavenumber();
  m.field_scale = std::sqrt(2.0 * constants::hbar * tweezer.angular_frequency() /
                            (constants::vacuum_permittivity * cavity.mode_volume()));
  return m;
}

FieldSample total_field(const Eigen::Vector3d& r, double tweezer_amplitude, const Eigen::Vector2cd& cavity_amplitudes,
                        const FieldModel& model) {
  const auto ft = tweezer_mode(r, model.tweezer);
  const auto fc = cavity_mode(r, model.basis, model.wavenumber, model.cavity.phase);
  const Eigen::Vector3cd cavity_pol =
      cavity_amplitudes[0] * model.basis.cavity1.cast<cdouble>() + cavity_amplitudes[1] * model.basis.cavity2.cast<cdouble>();
  const Eigen::Vector3cd tweezer_pol = tweezer_amplitude * model.basis.tweezer;

  FieldSample s;
  s.field = model.field_scale * (tweezer_pol * ft.value + cavity_pol * fc.value);
  s.gradient = model.field_scale * (ft.gradient * tweezer_pol.transpose() +
                                    fc.gradient.cast<cdouble>() * cavity_pol.transpose());
  return s;
}

}  // namespace nanorotor

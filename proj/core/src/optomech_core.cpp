#include "nanorotor/optomech_core.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "nanorotor/errors.hpp"

namespace nanorotor {
namespace {

const cdouble I(0.0, 1.0);

// Cross product for complex 3-vectors without conjugation.
Eigen::Vector3cd cross(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

cdouble dot(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b) { return (a.array() * b.array()).sum(); }

struct Snapshot {
  FieldSample field;
  Eigen::Matrix3d chi;
};

Snapshot snapshot(const Setup& s, const Eigen::Vector3d& r, const Orientation& o, const Eigen::Vector2cd& b) {
  return {total_field(r, s.tweezer_amplitude, b, s.fields), susceptibility_tensor(o, s.material.susceptibility)};
}

double radiation_prefactor(const Setup& s) {
  const double k = s.wavenumber();
  const double v = s.material.volume;
  return constants::vacuum_permittivity * k * k * k * v * v / (12.0 * constants::pi);
}

Eigen::Vector3d force_from(const Setup& s, const Snapshot& snap) {
  const Eigen::Vector3cd chi_e = snap.chi.cast<cdouble>() * snap.field.field;
  return 0.5 * constants::vacuum_permittivity * s.material.volume * (snap.field.gradient.conjugate() * chi_e).real();
}

Eigen::Vector3d torque_from(const Setup& s, const Snapshot& snap) {
  const Eigen::Vector3cd chi_ec = snap.chi.cast<cdouble>() * snap.field.field.conjugate();
  return 0.5 * constants::vacuum_permittivity * s.material.volume * cross(chi_ec, snap.field.field).real();
}

Eigen::Vector3d radiation_force_from(const Setup& s, const Snapshot& snap) {
  const Eigen::Matrix3cd chi = snap.chi.cast<cdouble>();
  const Eigen::Vector3cd chi_ec = chi * snap.field.field.conjugate();
  return radiation_prefactor(s) * (snap.field.gradient * chi * chi_ec).imag();
}

Eigen::Vector3d radiation_torque_from(const Setup& s, const Snapshot& snap) {
  const Eigen::Matrix3cd chi = snap.chi.cast<cdouble>();
  const Eigen::Vector3cd& e = snap.field.field;
  const Eigen::Vector3cd ec = e.conjugate();
  const Eigen::Vector3cd term = cross(chi * chi * ec, e) - cross(chi * ec, chi * e);
  return radiation_prefactor(s) * term.imag();
}

struct CavityMatrices {
  Eigen::Matrix2d detuning;
  Eigen::Matrix2d linewidth;
  Eigen::Vector2cd drive;
};

CavityMatrices cavity_matrices(const Setup& s, const Eigen::Vector3d& r, const Eigen::Matrix3d& chi, bool scattering) {
  const auto fc = cavity_mode(r, s.fields.basis, s.wavenumber(), s.cavity().phase);
  const auto ft = tweezer_mode(r, s.tweezer());
  const double u0 = s.optical.coupling;
  const double gsc = scattering ? s.optical.scattering : 0.0;
  const Eigen::Matrix3d chi2 = chi * chi;
  const std::array<Eigen::Vector3d, 2> e = {s.fields.basis.cavity1, s.fields.basis.cavity2};
  const double fc2 = fc.value * fc.value;

  CavityMatrices m;
  for (int j = 0; j < 2; ++j) {
    for (int l = 0; l < 2; ++l) {
      m.detuning(j, l) = (j == l ? s.cavity().detuning : 0.0) - u0 * fc2 * e[j].dot(chi * e[l]);
      m.linewidth(j, l) = (j == l ? s.cavity().linewidth : 0.0) + 0.5 * gsc * fc2 * e[j].dot(chi2 * e[l]);
    }
    const Eigen::Matrix3cd op = I * u0 * chi.cast<cdouble>() + 0.5 * gsc * chi2.cast<cdouble>();
    m.drive[j] = -s.tweezer_amplitude * dot(e[j].cast<cdouble>(), op * s.fields.basis.tweezer) * fc.value * ft.value;
  }
  return m;
}

}  // namespace

Setup Setup::create(const Ellipsoid& particle, const TweezerConfig& tweezer, const CavityConfig& cavity) {
  particle.validate();
  tweezer.validate();
  cavity.validate();
  Setup s;
  s.particle = particle;
  s.material = material_response(particle);
  s.fields = FieldModel::create(tweezer, cavity);
  s.tweezer_amplitude = tweezer_amplitude_from_power(tweezer.power, tweezer, cavity);
  const double omega = tweezer.angular_frequency();
  const double k = tweezer.wavenumber();
  const double vc = cavity.mode_volume();
  const double v = s.material.volume;
  s.optical.coupling = -omega * v / (2.0 * vc);
  s.optical.scattering = omega * k * k * k * v * v / (6.0 * constants::pi * vc);
  return s;
}

bool MechanicalState::finite() const {
  return position.allFinite() && momentum.allFinite() && angular_momentum.allFinite() && cavity.allFinite() &&
         orientation.quaternion().coeffs().allFinite();
}

StateVector pack(const MechanicalState& s) {
  StateVector v{};
  const auto& q = s.orientation.quaternion();
  for (int i = 0; i < 3; ++i) {
    v[i] = s.position[i];
    v[3 + i] = s.momentum[i];
    v[10 + i] = s.angular_momentum[i];
  }
  v[6] = q.w();
  v[7] = q.x();
  v[8] = q.y();
  v[9] = q.z();
  v[13] = s.cavity[0].real();
  v[14] = s.cavity[0].imag();
  v[15] = s.cavity[1].real();
  v[16] = s.cavity[1].imag();
  return v;
}

MechanicalState unpack(const StateVector& v, double time) {
  MechanicalState s;
  s.position = {v[0], v[1], v[2]};
  s.momentum = {v[3], v[4], v[5]};
  s.orientation = Orientation(Eigen::Quaterniond(v[6], v[7], v[8], v[9]));
  s.angular_momentum = {v[10], v[11], v[12]};
  s.cavity = {cdouble(v[13], v[14]), cdouble(v[15], v[16])};
  s.time = time;
  return s;
}

double optical_potential(const Setup& s, const Eigen::Vector3d& r, const Orientation& o, const Eigen::Vector2cd& b) {
  const auto snap = snapshot(s, r, o, b);
  const cdouble form = snap.field.field.dot(snap.chi.cast<cdouble>() * snap.field.field);  // E^dagger chi E
  const double scale = snap.chi.norm() * snap.field.field.squaredNorm();
  if (std::abs(form.imag()) > 1e-12 * scale + 1e-300) {
    throw ConsistencyError("optical potential has a non-real part beyond rounding");
  }
  return -0.25 * constants::vacuum_permittivity * s.material.volume * form.real();
}

Eigen::Vector3d conservative_force(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                   const Eigen::Vector2cd& b) {
  return force_from(s, snapshot(s, r, o, b));
}

Eigen::Vector3d conservative_torque(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                    const Eigen::Vector2cd& b) {
  return torque_from(s, snapshot(s, r, o, b));
}

Eigen::Vector3d radiation_force(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                const Eigen::Vector2cd& b) {
  return radiation_force_from(s, snapshot(s, r, o, b));
}

Eigen::Vector3d radiation_torque(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                 const Eigen::Vector2cd& b) {
  return radiation_torque_from(s, snapshot(s, r, o, b));
}

Eigen::Vector2cd cavity_drive(const Setup& s, const Eigen::Vector3d& r, const Orientation& o, bool scattering) {
  return cavity_matrices(s, r, susceptibility_tensor(o, s.material.susceptibility), scattering).drive;
}

Eigen::Matrix2d effective_detuning(const Setup& s, const Eigen::Vector3d& r, const Orientation& o) {
  return cavity_matrices(s, r, susceptibility_tensor(o, s.material.susceptibility), false).detuning;
}

Eigen::Matrix2d effective_linewidth(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                    bool scattering) {
  return cavity_matrices(s, r, susceptibility_tensor(o, s.material.susceptibility), scattering).linewidth;
}

Eigen::Vector2cd steady_cavity_amplitudes(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                          bool scattering) {
  const auto m = cavity_matrices(s, r, susceptibility_tensor(o, s.material.susceptibility), scattering);
  const Eigen::Matrix2cd a = I * m.detuning.cast<cdouble>() - m.linewidth.cast<cdouble>();
  return a.partialPivLu().solve(-m.drive);
}

Eigen::Vector2cd potential_cavity_derivative(const Setup& s, const Eigen::Vector3d& r, const Orientation& o,
                                             const Eigen::Vector2cd& b) {
  const auto snap = snapshot(s, r, o, b);
  const auto fc = cavity_mode(r, s.fields.basis, s.wavenumber(), s.cavity().phase);
  const Eigen::Vector3cd chi_ec = snap.chi.cast<cdouble>() * snap.field.field.conjugate();
  const double pre = -0.25 * constants::vacuum_permittivity * s.material.volume * s.fields.field_scale * fc.value;
  return {pre * dot(chi_ec, s.fields.basis.cavity1.cast<cdouble>()),
          pre * dot(chi_ec, s.fields.basis.cavity2.cast<cdouble>())};
}

StateRate equations_of_motion(const Setup& s, const MechanicalState& state, const DynamicsOptions& options) {
  const auto snap = snapshot(s, state.position, state.orientation, state.cavity);
  const Eigen::Matrix3d rot = state.orientation.matrix();
  const Eigen::Vector3d& inertia = s.material.inertia;

  StateRate rate;
  rate.velocity = state.momentum / s.material.mass;
  rate.force = force_from(s, snap);
  Eigen::Vector3d torque = torque_from(s, snap);
  if (options.radiation) {
    rate.force += radiation_force_from(s, snap);
    torque += radiation_torque_from(s, snap);
  }

  const Eigen::Vector3d omega_body = state.angular_momentum.cwiseQuotient(inertia);
  const Eigen::Quaterniond qdot =
      state.orientation.quaternion() * Eigen::Quaterniond(0.0, omega_body.x(), omega_body.y(), omega_body.z());
  rate.quaternion_rate = 0.5 * Eigen::Vector4d(qdot.w(), qdot.x(), qdot.y(), qdot.z());
  rate.body_torque = state.angular_momentum.cross(omega_body) + rot.transpose() * torque;

  if (options.cavity) {
    const auto m = cavity_matrices(s, state.position, snap.chi, options.radiation);
    const Eigen::Matrix2cd a = I * m.detuning.cast<cdouble>() - m.linewidth.cast<cdouble>();
    rate.cavity_rate = a * state.cavity + m.drive;
  }
  return rate;
}

void equations_of_motion(const Setup& s, const StateVector& x, StateVector& dxdt, const DynamicsOptions& options) {
  const MechanicalState state = unpack(x);
  const StateRate r = equations_of_motion(s, state, options);
  for (int i = 0; i < 3; ++i) {
    dxdt[i] = r.velocity[i];
    dxdt[3 + i] = r.force[i];
    dxdt[10 + i] = r.body_torque[i];
  }
  for (int i = 0; i < 4; ++i) dxdt[6 + i] = r.quaternion_rate[i];
  dxdt[13] = r.cavity_rate[0].real();
  dxdt[14] = r.cavity_rate[0].imag();
  dxdt[15] = r.cavity_rate[1].real();
  dxdt[16] = r.cavity_rate[1].imag();
}

double kinetic_energy(const Setup& s, const MechanicalState& state) {
  const Eigen::Vector3d omega_body = state.angular_momentum.cwiseQuotient(s.material.inertia);
  return 0.5 * state.momentum.squaredNorm() / s.material.mass + 0.5 * state.angular_momentum.dot(omega_body);
}

double hamiltonian(const Setup& s, const MechanicalState& state) {
  return kinetic_energy(s, state) + optical_potential(s, state.position, state.orientation, state.cavity) -
         constants::hbar * s.cavity().detuning * state.cavity.squaredNorm();
}

bool stability_check(double detuning, double coupling, double max_susceptibility) {
  return detuning < coupling * max_susceptibility;
}

bool stability_check(const Setup& s) {
  return stability_check(s.cavity().detuning, s.optical.coupling, s.material.susceptibility.maxCoeff());
}

}  // namespace nanorotor

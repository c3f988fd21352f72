#include "nanorotor/spinup.hpp"

#include <algorithm>
#include <cmath>

#include "nanorotor/stochastic_sim.hpp"

namespace nanorotor {

double rotational_temperature(const CoolingReport& report) {
  double t = 0.0;
  for (int q = alpha; q <= gamma; ++q) {
    const ModeReport& m = report.modes[q];
    if (!m.confined || !m.occupation) continue;
    t = std::max(t, constants::hbar * m.frequency * (*m.occupation + 0.5) / constants::boltzmann);
  }
  return t;
}

SpinupResult spinup_simulation(const Setup& cooled, const Environment& env, const CoolingReport& cooled_report,
                               const SpinupOptions& options) {
  TweezerConfig tweezer = cooled.tweezer();
  tweezer.ellipticity = constants::pi / 4.0;
  tweezer.power = options.power;
  CavityConfig cavity = cooled.cavity();
  cavity.detuning = options.detuning;
  const Setup s = Setup::create(cooled.particle, tweezer, cavity);

  SpinupResult r;
  r.temperature = rotational_temperature(cooled_report);
  r.damping = gas_damping_constant(s, env);
  const double inertia = s.material.inertia[0];  // spin about the short a-axis, which lies along the beam
  const double stretch_rate = 2.0 * options.sound_speed / (s.particle.permittivity * s.particle.diameters[2]);

  auto record = [&](double t, double omega) {
    const double nu = omega / constants::two_pi;
    r.time.push_back(t);
    r.frequency.push_back(nu);
    if (!r.tennis_racket_time && r.temperature > 0.0 &&
        constants::hbar * std::abs(omega) / (constants::boltzmann * r.temperature) >= 0.1)
      r.tennis_racket_time = t;
    if (!r.stretching_time && std::abs(omega) >= stretch_rate) r.stretching_time = t;
    if (!r.gigahertz_time && std::abs(nu) >= 1e9) r.gigahertz_time = t;
  };

  // Full dynamics from the cooled configuration at rest.
  MechanicalState state;
  const Vector6d& q0 = cooled_report.equilibrium.position;
  state.position = q0.head<3>();
  state.orientation = orientation_of(q0);
  // Far detuned: the cavity stays empty and is not evolved. Trap
  // frequencies scale with the square root of the power.
  double fastest = constants::two_pi * 1e6;
  for (const auto& m : cooled_report.modes) fastest = std::max(fastest, m.frequency);
  fastest *= 1.5 * std::sqrt(std::max(1.0, options.power / cooled.tweezer().power));
  SimulationOptions sim;
  sim.dynamics.cavity = false;
  sim.dt = constants::two_pi / (40.0 * fastest);
  sim.duration = std::min(options.full_dynamics_duration, options.duration);
  sim.sample_stride = std::max(1, static_cast<int>(sim.duration / sim.dt / (options.samples / 4 + 1)));
  double t_end = 0.0;
  double omega_end = 0.0;
  integrate(state, s, NoiseModel{}, sim, [&](double t, const StateVector& x) {
    const MechanicalState m = unpack(x);
    const Eigen::Vector3d omega_body = m.angular_momentum.cwiseQuotient(s.material.inertia);
    const double omega_z = (m.orientation.matrix() * omega_body).z();
    record(t, omega_z);
    t_end = t;
    omega_end = omega_z;
  });

  // Axially averaged rotor: the axial torque is independent of the spin angle.
  const Eigen::Vector3d axis_aligned = tweezer_minimum(s).tail<3>();
  r.torque = radiation_torque(s, Eigen::Vector3d::Zero(), Orientation::from_euler(axis_aligned),
                              Eigen::Vector2cd::Zero())
                 .z();
  const double drive = r.torque / inertia;
  const int remaining = std::max(1, options.samples - static_cast<int>(r.time.size()));
  for (int i = 1; i <= remaining; ++i) {
    const double t = t_end + (options.duration - t_end) * i / remaining;
    const double tau = t - t_end;
    double omega;
    if (r.damping > 0.0) {
      const double terminal = drive / r.damping;
      omega = terminal + (omega_end - terminal) * std::exp(-r.damping * tau);
    } else {
      omega = omega_end + drive * tau;
    }
    record(t, omega);
  }
  return r;
}

}  // namespace nanorotor

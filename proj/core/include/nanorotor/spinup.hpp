#pragma once

#include <optional>
#include <vector>

#include "nanorotor/linear_analysis.hpp"

namespace nanorotor {

struct SpinupOptions {
  double power = 0.5;                     // W, circularly polarized drive
  double detuning = -constants::two_pi * 100e6;  // rad/s, far from the cavity
  double duration = 50e-3;                // s
  double full_dynamics_duration = 50e-6;  // s of full nonlinear dynamics first
  double sound_speed = constants::silicon_sound_speed;
  int samples = 400;
};

struct SpinupResult {
  std::vector<double> time;       // s
  std::vector<double> frequency;  // rotation frequency about the beam axis, Hz
  double temperature = 0.0;       // K, angular-momentum width of the cooled start
  double torque = 0.0;            // N m, axial non-conservative torque
  double damping = 0.0;           // 1/s, rotational gas damping
  std::optional<double> tennis_racket_time;  // first t with hbar w / k_B T >= 0.1
  std::optional<double> stretching_time;     // first t with l_c w / 2 >= c_s / eps_r
  std::optional<double> gigahertz_time;      // first t with nu >= 1 GHz
  bool tennis_racket() const { return tennis_racket_time.has_value(); }
  bool stretching() const { return stretching_time.has_value(); }
  double final_frequency() const { return frequency.empty() ? 0.0 : frequency.back(); }
};

/// Rotational temperature of the cooled start:
/// max over librations of hbar omega_Q (n_Q + 1/2) / k_B.
double rotational_temperature(const CoolingReport& report);

/// Switches the tweezer of `cooled` to circular polarization with the given
/// power and detuning and follows the rotation about the beam axis. The
/// first window uses the full nonlinear dynamics from the cooled
/// equilibrium; after it the axially averaged rotor I_a dw/dt = N_z - I_a
/// gamma w is solved in closed form.
SpinupResult spinup_simulation(const Setup& cooled, const Environment& env, const CoolingReport& cooled_report,
                               const SpinupOptions& options);

}  // namespace nanorotor

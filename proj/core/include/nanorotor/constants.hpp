#pragma once

#include <numbers>

namespace nanorotor::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m
inline constexpr double atomic_mass_unit = 1.66053906660e-27;    // kg

// Bulk silicon near 1550 nm.
inline constexpr double silicon_density = 2329.0;       // kg/m^3
inline constexpr double silicon_permittivity = 12.1;
inline constexpr double silicon_sound_speed = 8433.0;   // m/s, longitudinal

inline constexpr double helium_mass = 4.0026 * atomic_mass_unit;

// Mode is treated as unconfined below this trap frequency (rad/s).
inline constexpr double unconfined_frequency = two_pi * 10.0;

}  // namespace nanorotor::constants

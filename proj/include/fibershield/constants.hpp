#pragma once

#include <numbers>

namespace fibershield::constants {

inline constexpr double pi = std::numbers::pi;

// CODATA 2018 (exact values where the SI defines them)
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double vacuum_permeability = 4.0e-7 * pi;      // H/m
inline constexpr double boltzmann = 1.380649e-23;               // J/K
inline constexpr double hbar = 1.054571817e-34;                 // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double electron_mass = 9.1093837015e-31;       // kg

inline constexpr double coulomb_constant = 1.0 / (4.0 * pi * vacuum_permittivity);

// 138Ba neutral atomic mass minus one electron.
inline constexpr double barium138_ion_mass = 137.905247 * atomic_mass_unit - electron_mass;

inline constexpr double seconds_per_week = 7.0 * 24.0 * 3600.0;

}  // namespace fibershield::constants

#pragma once

#include <numbers>

// Unit system used throughout: mass in amu, length in um, time in us.
// Frequencies are angular (rad/us). The quantum sector additionally works
// in mass-weighted coordinates with hbar scaled to 1.
namespace ggsep::constants {

// CODATA 2018 values, SI.
inline constexpr double elementary_charge_si = 1.602176634e-19;    // C (exact)
inline constexpr double vacuum_permittivity_si = 8.8541878128e-12; // F/m
inline constexpr double hbar_si = 1.054571817e-34;                 // J s
inline constexpr double amu_si = 1.66053906660e-27;                // kg
inline constexpr double electron_mass_amu = 5.48579909065e-4;

// q^2/(4 pi eps0), converted from kg m^3/s^2 to amu um^3/us^2.
inline constexpr double coulomb_constant =
    elementary_charge_si * elementary_charge_si /
    (4.0 * std::numbers::pi * vacuum_permittivity_si) / amu_si * 1e6;

// hbar in amu um^2/us.
inline constexpr double hbar = hbar_si / amu_si * 1e6;

// Neutral atomic masses minus one electron mass.
inline constexpr double mass_be9 = 9.0121831 - electron_mass_amu;   // amu
inline constexpr double mass_mg25 = 24.985837 - electron_mass_amu;  // amu

} // namespace ggsep::constants

#pragma once

#include <numbers>

// Frequencies and energies are stored as ordinary frequencies in Hz
// (E/h and omega/2pi). Angular conversion happens only where a formula
// mixes rates and times.
namespace mcoupler::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double vacuum_permittivity = 8.8541878128e-12;  // F/m

inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double fF = 1e-15;
inline constexpr double um = 1e-6;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;

}  // namespace mcoupler::units

#pragma once

#include <numbers>

namespace slugsim::constants {

// CODATA 2018 exact values.
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double boltzmann = 1.380649e-23;         // J/K
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace slugsim::constants

// units.hpp: internal unit system and physical constants
//
// hbar = 1. Lengths are micrometres, times microseconds, and every energy or
// rate is an angular frequency in rad/us. Configuration files give
// frequencies as nu in MHz; omega = 2 pi nu is applied on load.

#pragma once

#include <numbers>

namespace polariton {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Speed of light in um/us (numerically identical to m/s).
inline constexpr double kSpeedOfLight = 299792458.0;

// 87Rb D2 line, in MHz.
inline constexpr double kRb87D2FrequencyMHz = 384.23e6;

inline constexpr double kPerCm3ToPerUm3 = 1e-12;

inline constexpr double mhz_to_angular(double nu) { return kTwoPi * nu; }
inline constexpr double angular_to_mhz(double omega) { return omega / kTwoPi; }

} // namespace polariton

#pragma once

// Unit conversions used at the I/O boundary. Internally every rate is an
// angular frequency (rad/s) and every time is in seconds.

#include <numbers>

namespace lgsim::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
constexpr double rad_to_hz(double omega) { return omega / two_pi; }
constexpr double mhz_to_rad(double f_mhz) { return two_pi * 1e6 * f_mhz; }
constexpr double rad_to_mhz(double omega) { return omega / (two_pi * 1e6); }

constexpr double ns(double t_ns) { return 1e-9 * t_ns; }
constexpr double to_ns(double t_s) { return 1e9 * t_s; }

// Rate (1/s) from a lifetime given in nanoseconds.
constexpr double rate_from_lifetime_ns(double lifetime_ns) { return 1e9 / lifetime_ns; }

}  // namespace lgsim::units

#pragma once

// Data products shared by the analytic, numerical and pipeline layers.
//
// Fourier convention used everywhere:
//   K(tau) = (1/2pi) int S(w) e^{i w tau} dw,   S(w) = int K(tau) e^{-i w tau} dtau.
// A density S(w) therefore has the same numerical value as a two-sided
// density per hertz.

#include <cstddef>
#include <vector>

#include "lgsim/provenance.hpp"

namespace lgsim {

enum class SpectralUnits { spin_units, volts_squared, field_units };
enum class GridKind { one_sided, symmetric };

const char* to_string(SpectralUnits u);
const char* to_string(GridKind g);

struct SpectrumRecord {
  std::vector<double> freqs;    // rad/s, uniform
  std::vector<double> density;  // two-sided density (see convention above)
  SpectralUnits units = SpectralUnits::spin_units;
  GridKind grid = GridKind::one_sided;
  Provenance meta;

  std::size_t size() const { return freqs.size(); }
  // Grid step in rad/s; throws GridError when the grid is not uniform or
  // does not have the layout announced by `grid`.
  double step() const;
  void validate() const;

  // Grid k * df_hz for k = 0 .. n_bins-1, density zero.
  static SpectrumRecord one_sided(double df_hz, std::size_t n_bins,
                                  SpectralUnits units = SpectralUnits::spin_units);
};

struct CorrelatorSeries {
  std::vector<double> taus;    // s, uniform from 0
  std::vector<double> values;  // K(tau)
  SpectralUnits units = SpectralUnits::spin_units;
  Provenance meta;

  std::size_t size() const { return taus.size(); }
  double step() const;
};

struct LgCurve {
  std::vector<double> taus;  // s
  std::vector<double> f;
  std::vector<double> sigma_stat;  // zero for analytic curves
  std::vector<double> sys_lo;      // absolute lower bound of f
  std::vector<double> sys_hi;      // absolute upper bound of f
  // Set when the requested tau range needed correlator values beyond the grid.
  bool truncated = false;
  Provenance meta;

  std::size_t size() const { return taus.size(); }
};

}  // namespace lgsim

#pragma once

// Analytic sigma_z power spectrum of the continuously monitored driven qubit
// and the Leggett-Garg functional f(tau) = 2K(tau) - K(2 tau).

#include <cstddef>
#include <functional>
#include <limits>

#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/records.hpp"

namespace lgsim::analytic {

// Two-sided sigma_z spectrum for resonant drive at zero temperature:
//
//   S(w) = 2 [ g (1 - z^2)(g^2 + v + w^2)
//            + ((1 - z^2)(G2 - G1)/2 + wR^2 z^2 / G2)(g^2 + v - w^2) ]
//          / [ (g^2 + v + w^2)^2 - 4 v w^2 ]
//
// with g = (G1 + G2)/2, v = wR^2 - (G2 - G1)^2/4 (signed, so the overdamped
// case needs no complex branch) and z = z_st = -1 / (1 + wR^2/(G1 G2)).
// Normalized so that (1/2pi) int S dw = 1 - z_st^2.
double sigma_z_spectrum(double omega, double omega_rabi, double gamma1, double gamma2);

// Steady-state z used by sigma_z_spectrum.
double spectrum_steady_z(double omega_rabi, double gamma1, double gamma2);

struct FiniteBandwidthParams {
  double omega_rabi = 0.0;
  double gamma1 = 0.0;
  double gamma_phi = 0.0;  // intrinsic + measurement-induced pure dephasing at w = 0
  double kappa = std::numeric_limits<double>::infinity();

  void validate() const;
  // Gamma_2 seen by a fluctuation at frequency w: G1/2 + gamma_phi C(w).
  double gamma2_at(double omega) const;

  // gamma_phi = gamma_phi0 + 8 nbar chi^2 / kappa.
  static FiniteBandwidthParams from_physical(double omega_rabi, double gamma1, double gamma_phi0,
                                             double nbar, double chi, double kappa);
  // gamma_phi chosen so that gamma2_at(wR) equals the given Gamma_2.
  static FiniteBandwidthParams from_gamma2_at_rabi(double omega_rabi, double gamma1,
                                                   double gamma2, double kappa);
};

// sigma_z_spectrum evaluated with Gamma_2(w), multiplied by C(w).
double finite_bandwidth_spectrum(double omega, const FiniteBandwidthParams& p);

// Tabulates fn on the one-sided grid k * df_hz, k = 0 .. n_bins-1 (spin units).
SpectrumRecord tabulate(const std::function<double(double)>& fn, double df_hz,
                        std::size_t n_bins);

// Discrete inverse transform on the uniform input grid. A one-sided grid of
// M bins (starting at 0) is mirrored into an N = 2M point transform with the
// Nyquist bin zero; a symmetric grid of 2M-1 points maps to the same layout.
// Output: K(tau_r) for r = 0 .. N/2 with tau_r = 2 pi r / (N dw).
CorrelatorSeries correlator_from_spectrum(const SpectrumRecord& spec);

// Forward partner of correlator_from_spectrum (one-sided output of M bins).
SpectrumRecord spectrum_from_correlator(const CorrelatorSeries& corr);

// f(tau_r) = 2K(tau_r) - K(tau_2r) for every r with 2r on the grid and
// tau_r <= max_tau. Sets `truncated` when max_tau asks for more.
LgCurve leggett_garg_curve(const CorrelatorSeries& corr,
                           double max_tau = std::numeric_limits<double>::infinity());

// 2 cos(wR tau) - cos(2 wR tau).
double ideal_lg(double tau, double omega_rabi);

struct LgMax {
  double tau = 0.0;
  double f = 0.0;
  std::size_t index = 0;
};

// Largest f over tau > 0 (ties: smallest tau), refined by a parabola through
// the neighbours when both are tau > 0 grid points.
LgMax lg_max(const LgCurve& curve);

}  // namespace lgsim::analytic

#pragma once

// Closed-form Bloch-equation layer for a resonantly driven, dephased qubit.
//
// Conventions: z = +1 is the excited state, z = -1 the ground state. Rates
// are angular (rad/s) and times are seconds. The drive is along x, so for
// zero detuning
//   dx/dt = -G2 x
//   dy/dt = -G2 y - wR z
//   dz/dt =  wR y - G1 (z - z_th),   z_th = 2 p_e_thermal - 1.

#include <span>
#include <vector>

namespace lgsim {

struct TlsParams {
  double omega_ge = 0.0;     // rad/s
  double gamma1 = 0.0;       // 1/s
  double gamma_phi0 = 0.0;   // 1/s
  double p_e_thermal = 0.0;  // [0, 0.5]

  void validate() const;
  double z_thermal() const { return 2.0 * p_e_thermal - 1.0; }
};

struct CavityParams {
  double omega_c = 0.0;  // rad/s
  double kappa = 0.0;    // rad/s, > 0
  double chi0 = 0.0;     // rad/s, signed
  double lambda = 0.0;   // dispersive correction coefficient
  double n_crit = 1.0;

  void validate() const;
};

struct DriveParams {
  double omega_rabi = 0.0;  // rad/s
  double detuning = 0.0;    // rad/s
  double nbar = 0.0;

  void validate() const;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SpinTrajectory {
  std::vector<double> times;  // s, strictly increasing
  std::vector<BlochVector> xyz;

  std::vector<double> z() const;
  void validate() const;
};

namespace qubit {

// C(w) = 1 / (1 + (2w/kappa)^2).
double cavity_filter(double omega, double kappa);

// 8 nbar chi^2 / kappa.
double measurement_dephasing_rate(double nbar, double chi, double kappa);

// measurement_dephasing_rate * C(wR).
double rabi_dephasing_rate(double omega_rabi, double nbar, double chi, double kappa);

// Solution of the Bloch equations from the initial state (0, 0, z0).
// The drift matrix is diagonalized numerically; a critically damped
// (defective) matrix is split by perturbing wR by 1e-9 of the largest rate.
SpinTrajectory bloch_evolve(const TlsParams& tls, const DriveParams& drive, double gamma2,
                            double z0, std::span<const double> times);

// Long-time limit of z for the Bloch equations above.
double bloch_steady_state(const TlsParams& tls, const DriveParams& drive, double gamma2);

// Excited population in the driven steady state.
double saturation_population(double p0, double omega_rabi, double gamma1, double gamma2,
                             double detuning);

// Reflected-phase difference between the two pointer states: 2 atan(2 chi / kappa).
double dispersive_phase_shift(double chi, double kappa);

// Inverse of dispersive_phase_shift: chi = kappa tan(phi / 2) / 2 (rad/s).
double chi_from_phase_shift(double phase, double kappa);

struct RabiFit {
  double gamma2 = 0.0;
  double omega_rabi = 0.0;
  // Oscillation frequency squared of the fitted model; negative when overdamped.
  double omega_osc_sq = 0.0;
  // 1 / (slowest decay rate of the y-z block).
  double decay_time = 0.0;
  double z_initial = 0.0;
  double z_offset = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
};

struct RabiFitOptions {
  double rel_tol = 1e-8;
  int max_iterations = 200;
  // Residual RMS above which the fit is reported as failed.
  double max_rms = 5e-2;
};

// Least-squares fit of z(t) to the Bloch solution with free initial value and
// thermal offset (separable: both enter linearly). Gamma_1 is taken from tls.
RabiFit fit_rabi_decay(const SpinTrajectory& traj, const TlsParams& tls,
                       const RabiFitOptions& options = {});

}  // namespace qubit
}  // namespace lgsim

#pragma once

// Truncated qubit (x) Fock master-equation engine.
//
// Basis ordering: index = q * fock_dim + n with q = 0 (ground), 1 (excited)
// and n the photon number. sigma_z = diag(-1, +1) on the qubit factor.
// Density operators are vectorized by column stacking, so
// vec(A X B) = (B^T (x) A) vec(X).
//
// In the frames of the two drives the Hamiltonian is
//   H = (Dq/2) sz + Dc a^dag a + chi a^dag a sz + eps_m (a + a^dag) + eps_d sx
// with Dq = w_ge - w_d and Dc = w_c - w_m. The dissipators are
// kappa D[a], Gamma_1 D[s-] and (Gamma_phi0 / 2) D[sz].

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/records.hpp"

namespace lgsim::lindblad {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;

struct HilbertConfig {
  int fock_dim = 10;
  double qubit_detuning = 0.0;   // w_ge - w_d (rad/s)
  double cavity_detuning = 0.0;  // w_c - w_m (rad/s)

  void validate() const;
  // ceil(nbar + 5 sqrt(nbar) + 5)
  static int recommended_fock_dim(double nbar);
  // Below ceil(nbar + 2 sqrt(nbar) + 2) the truncation is an error.
  static int minimum_fock_dim(double nbar);
};

struct DriveAmplitudes {
  double eps_m = 0.0;  // cavity drive (rad/s)
  double eps_d = 0.0;  // qubit drive; Rabi frequency is 2 eps_d

  void validate() const;
  // Empty-cavity resonant relation nbar = (2 eps_m / kappa)^2.
  static double eps_for_nbar(double nbar, double kappa);
};

struct Operators {
  int fock_dim = 0;
  SparseMatrix a, adag, number, sigma_minus, sigma_z, sigma_x, sigma_y, identity;

  static Operators make(int fock_dim);
  int dim() const { return 2 * fock_dim; }
};

class DensityOperator {
 public:
  DensityOperator() = default;
  explicit DensityOperator(Eigen::MatrixXcd m);
  static DensityOperator from_vector(const Vector& v, int dim);
  // |q><q| (x) |n><n|
  static DensityOperator basis_state(int fock_dim, int qubit, int photons);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Vector vec() const;

  cplx trace() const { return m_.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  cplx expect(const SparseMatrix& op) const;
  double trace_distance(const DensityOperator& other) const;
  // Throws IntegrationError when an invariant is violated beyond tolerance.
  void check_invariants(double step_hint, bool check_positivity = true) const;

 private:
  Eigen::MatrixXcd m_;
};

struct Generator {
  SparseMatrix liouvillian;  // (2N)^2 x (2N)^2, column major
  Operators ops;
  SparseMatrix hamiltonian;
  double kappa = 0.0;
  double gamma1 = 0.0;
  double gamma_phi0 = 0.0;
  double omega_max = 0.0;  // Gershgorin bound on |H|
  double nbar_estimate = 0.0;
  std::vector<std::string> warnings;

  int dim() const { return ops.dim(); }
  Vector apply(const Vector& v) const { return liouvillian * v; }
  // (1/40) min(2 pi / omega_max, 1 / kappa, 1 / Gamma_1)
  double max_step() const;
};

Generator build_generator(const TlsParams& tls, const CavityParams& cavity,
                          const HilbertConfig& hilbert, const DriveAmplitudes& drives);

// Fixed-step RK4 propagation of a vectorized operator from t0 to t1 using
// ceil((t1 - t0) / max_step) equal steps.
void propagate(Vector& v, const Generator& gen, double duration);

using Observer = std::function<void(std::size_t index, const DensityOperator& rho)>;

// rho0 is taken to be the state at t_grid[0].
void evolve_observe(const DensityOperator& rho0, const Generator& gen,
                    std::span<const double> t_grid, const Observer& observer,
                    bool check_positivity = true);
std::vector<DensityOperator> evolve(const DensityOperator& rho0, const Generator& gen,
                                    std::span<const double> t_grid);

DensityOperator steady_state(const Generator& gen);

// Ensemble-averaged Bloch vector along an evolution.
SpinTrajectory bloch_trajectory(const DensityOperator& rho0, const Generator& gen,
                                std::span<const double> t_grid);

// K'(tau) = kappa Re tr[a^dag e^{L tau}(a rho - <a> rho)] on tau_grid.
CorrelatorSeries two_time_correlator(const DensityOperator& steady, const Generator& gen,
                                     std::span<const double> tau_grid);

struct RegressionOptions {
  double max_tau = 50e-6;         // hard cap on the propagation window (s)
  double decay_tolerance = 1e-9;  // stop when |K'| < tol * K'(0) over a window
  double window = 200e-9;
};

// Two-sided output-field spectrum S(w) = 2 int_0^inf K'(tau) cos(w tau) dtau,
// from the RK4-propagated correlator (trapezoid at the RK4 step).
SpectrumRecord regression_spectrum(const DensityOperator& steady, const Generator& gen,
                                   std::span<const double> omegas,
                                   const RegressionOptions& options = {});

// Same quantity from the resolvent: kappa Re[G(w) + G(-w)],
// G(w) = tr[a^dag (i w - L)^{-1} X]. Used for cross-checks.
SpectrumRecord resolvent_spectrum(const DensityOperator& steady, const Generator& gen,
                                  std::span<const double> omegas);

// Eigenvalue of the Liouvillian nearest to `shift` (shift-invert iteration).
cplx nearest_eigenvalue(const Generator& gen, cplx shift);

struct DeltaV {
  double delta_v = 0.0;  // full swing between the pointer states (field units)
  double phase = 0.0;    // arg(<a>_g conj(<a>_e))
  cplx alpha_g;
  cplx alpha_e;
  double nbar_g = 0.0;
  double nbar_e = 0.0;
  std::vector<std::string> warnings;
};

// Output field is sqrt(kappa) a; deltaV = 2 |<a>_g - <a>_e| * sqrt(kappa)/2.
double output_scale(double kappa);

// Cavity steady states with the qubit pinned to g and to e.
DeltaV simulate_deltaV(const TlsParams& tls, const CavityParams& cavity,
                       const HilbertConfig& hilbert, double eps_m);

// chi(nbar) = chi0 (1 - lambda nbar); ValidityError when lambda nbar >= 1.
double dispersive_correction(double chi0, double lambda, double nbar);
// Companion scale for deltaV: deltaV (1 - lambda nbar).
double corrected_output(double delta_v, double lambda, double nbar);

// Drive calibration against an oscillation-frequency target.
struct RabiCalibration {
  double eps_d = 0.0;
  double target_osc_sq = 0.0;   // signed w~^2
  double numeric_osc_sq = 0.0;  // from the Rabi eigenpair
  cplx eig_plus;
  cplx eig_minus;
  int iterations = 0;
};

// Adjusts eps_d until the Liouvillian eigenpair closest to
// -gamma_guess +- i sqrt(target) (or +- sqrt(-target) when overdamped)
// satisfies -((l1 - l2)/2)^2 = target. `build` maps eps_d to a generator.
RabiCalibration calibrate_rabi_drive(const std::function<Generator(double)>& build,
                                     double eps_d_start, double target_osc_sq,
                                     double gamma_guess, int max_iterations = 6);

}  // namespace lgsim::lindblad

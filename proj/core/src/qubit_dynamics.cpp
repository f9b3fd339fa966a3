#include "lgsim/qubit_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bloch_internal.hpp"
#include "lgsim/errors.hpp"

namespace lgsim {

namespace {

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be finite and >= 0");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be finite and > 0");
}

}  // namespace

void TlsParams::validate() const {
  require_nonnegative(omega_ge, "omega_ge");
  require_nonnegative(gamma1, "gamma1");
  require_nonnegative(gamma_phi0, "gamma_phi0");
  if (!(p_e_thermal >= 0.0 && p_e_thermal <= 0.5))
    throw ParameterError("p_e_thermal must lie in [0, 0.5]");
}

void CavityParams::validate() const {
  require_nonnegative(omega_c, "omega_c");
  require_positive(kappa, "kappa");
  if (!std::isfinite(chi0)) throw ParameterError("chi0 must be finite");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParameterError("lambda must lie in [0, 1)");
  require_positive(n_crit, "n_crit");
}

void DriveParams::validate() const {
  require_nonnegative(omega_rabi, "omega_rabi");
  require_nonnegative(nbar, "nbar");
  if (!std::isfinite(detuning)) throw ParameterError("detuning must be finite");
}

std::vector<double> SpinTrajectory::z() const {
  std::vector<double> out(xyz.size());
  std::transform(xyz.begin(), xyz.end(), out.begin(), [](const BlochVector& v) { return v.z; });
  return out;
}

void SpinTrajectory::validate() const {
  if (times.size() != xyz.size()) throw DataError("trajectory times/xyz length mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw GridError("trajectory times must be strictly increasing");
}

namespace detail {

Eigen::Matrix4d bloch_generator(double g1, double g2, double wr, double dw, double z_th) {
  Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
  B(0, 0) = -g2;
  B(0, 1) = -dw;
  B(1, 0) = dw;
  B(1, 1) = -g2;
  B(1, 2) = -wr;
  B(2, 1) = wr;
  B(2, 2) = -g1;
  B(2, 3) = g1 * z_th;
  return B;
}

BlochPropagator::BlochPropagator(double g1, double g2, double wr, double dw, double z_th) {
  factor(bloch_generator(g1, g2, wr, dw, z_th));
  const double cond = v_.cwiseAbs().colwise().sum().maxCoeff() *
                      v_inv_.cwiseAbs().colwise().sum().maxCoeff();
  if (!(cond < 1e8)) {
    // Defective (critically damped) drift matrix: split the double root.
    const double eps = 1e-9 * std::max({std::abs(wr), g1, g2, std::abs(dw)});
    factor(bloch_generator(g1, g2, wr + eps, dw, z_th));
  }
}

void BlochPropagator::factor(const Eigen::Matrix4d& B) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(B);
  lambda_ = es.eigenvalues();
  v_ = es.eigenvectors();
  v_inv_ = v_.inverse();
}

Eigen::Vector4d BlochPropagator::apply(double t, const Eigen::Vector4d& w0) const {
  const Eigen::Vector4cd c = v_inv_ * w0.cast<std::complex<double>>();
  Eigen::Vector4cd e;
  for (int k = 0; k < 4; ++k) e[k] = std::exp(lambda_[k] * t) * c[k];
  return (v_ * e).real();
}

void BlochPropagator::z_basis(std::span<const double> times, std::vector<double>& a,
                              std::vector<double>& b) const {
  // Coefficients for the two unit initial conditions; only row 2 of V is needed.
  const Eigen::Vector4cd cb = v_inv_.col(2);
  const Eigen::Vector4cd ca = v_inv_.col(3);
  a.resize(times.size());
  b.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::complex<double> za = 0.0, zb = 0.0;
    for (int k = 0; k < 4; ++k) {
      const std::complex<double> e = std::exp(lambda_[k] * times[i]) * v_(2, k);
      za += e * ca[k];
      zb += e * cb[k];
    }
    a[i] = za.real();
    b[i] = zb.real();
  }
}

}  // namespace detail

namespace qubit {

double cavity_filter(double omega, double kappa) {
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  const double r = 2.0 * omega / kappa;
  return 1.0 / (1.0 + r * r);
}

double measurement_dephasing_rate(double nbar, double chi, double kappa) {
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  require_nonnegative(nbar, "nbar");
  return 8.0 * nbar * chi * chi / kappa;
}

double rabi_dephasing_rate(double omega_rabi, double nbar, double chi, double kappa) {
  require_nonnegative(omega_rabi, "omega_rabi");
  return measurement_dephasing_rate(nbar, chi, kappa) * cavity_filter(omega_rabi, kappa);
}

SpinTrajectory bloch_evolve(const TlsParams& tls, const DriveParams& drive, double gamma2,
                            double z0, std::span<const double> times) {
  tls.validate();
  drive.validate();
  if (!(gamma2 >= 0.5 * tls.gamma1))
    throw UnphysicalRatesError("gamma2 must be >= gamma1 / 2");
  if (!(std::abs(z0) <= 1.0)) throw ParameterError("z0 must lie in [-1, 1]");

  SpinTrajectory traj;
  traj.times.assign(times.begin(), times.end());

  const detail::BlochPropagator prop(tls.gamma1, gamma2, drive.omega_rabi, drive.detuning,
                                     tls.z_thermal());
  const Eigen::Vector4d w0(0.0, 0.0, z0, 1.0);
  traj.xyz.reserve(times.size());
  for (double t : times) {
    const Eigen::Vector4d w = prop.apply(t, w0);
    traj.xyz.push_back({w[0], w[1], w[2]});
  }
  traj.validate();
  return traj;
}

double bloch_steady_state(const TlsParams& tls, const DriveParams& drive, double gamma2) {
  tls.validate();
  drive.validate();
  if (!(gamma2 >= 0.5 * tls.gamma1))
    throw UnphysicalRatesError("gamma2 must be >= gamma1 / 2");
  const double wr = drive.omega_rabi;
  if (wr == 0.0) return tls.z_thermal();
  if (tls.gamma1 == 0.0 || gamma2 == 0.0)
    throw SingularParameterError("driven steady state needs gamma1 > 0 and gamma2 > 0");
  const double d = drive.detuning / gamma2;
  const double lorentz = 1.0 + d * d;
  return tls.z_thermal() * lorentz / (lorentz + wr * wr / (tls.gamma1 * gamma2));
}

double saturation_population(double p0, double omega_rabi, double gamma1, double gamma2,
                             double detuning) {
  if (!(p0 >= 0.0 && p0 <= 0.5)) throw ParameterError("p0 must lie in [0, 0.5]");
  require_positive(gamma1, "gamma1");
  require_positive(gamma2, "gamma2");
  require_nonnegative(omega_rabi, "omega_rabi");
  if (std::isinf(detuning)) return p0;
  const double d = detuning / gamma2;
  const double lorentz = 1.0 + d * d;
  const double s = omega_rabi * omega_rabi / (gamma1 * gamma2);
  return 0.5 - (0.5 - p0) * lorentz / (lorentz + s);
}

double dispersive_phase_shift(double chi, double kappa) {
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  return 2.0 * std::atan(2.0 * chi / kappa);
}

double chi_from_phase_shift(double phase, double kappa) {
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  return 0.5 * kappa * std::tan(0.5 * phase);
}

}  // namespace qubit
}  // namespace lgsim

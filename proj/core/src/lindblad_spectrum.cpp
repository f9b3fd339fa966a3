#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "lgsim/errors.hpp"
#include "lgsim/fourier.hpp"
#include "lgsim/lindblad.hpp"

namespace lgsim::lindblad {

namespace {

// Vectorized a rho - <a> rho.
Vector fluctuation_operator(const DensityOperator& steady, const Generator& gen) {
  const Eigen::MatrixXcd arho = gen.ops.a * steady.matrix();
  const cplx mean = arho.trace();
  const Eigen::MatrixXcd x = arho - mean * steady.matrix();
  return Eigen::Map<const Vector>(x.data(), x.size());
}

// w such that w^T vec(X) = tr(a^dag X).
Vector adag_trace_weights(const Generator& gen) {
  const Eigen::MatrixXcd adT = Eigen::MatrixXcd(gen.ops.adag).transpose();
  return Eigen::Map<const Vector>(adT.data(), adT.size());
}

SpectrumRecord field_record(std::span<const double> omegas, std::vector<double> density) {
  SpectrumRecord s;
  s.freqs.assign(omegas.begin(), omegas.end());
  s.density = std::move(density);
  s.units = SpectralUnits::field_units;
  s.grid = GridKind::one_sided;
  return s;
}

SparseMatrix shifted(const SparseMatrix& L, cplx shift) {
  SparseMatrix I(L.rows(), L.cols());
  I.setIdentity();
  SparseMatrix m = L - shift * I;
  m.makeCompressed();
  return m;
}

}  // namespace

CorrelatorSeries two_time_correlator(const DensityOperator& steady, const Generator& gen,
                                     std::span<const double> tau_grid) {
  if (steady.dim() != gen.dim()) throw ParameterError("state dimension does not match generator");
  for (std::size_t i = 0; i < tau_grid.size(); ++i)
    if (tau_grid[i] < 0.0 || (i > 0 && !(tau_grid[i] > tau_grid[i - 1])))
      throw GridError("tau_grid must be increasing and >= 0");

  Vector x = fluctuation_operator(steady, gen);
  const Vector w = adag_trace_weights(gen);
  CorrelatorSeries out;
  out.units = SpectralUnits::field_units;
  out.taus.assign(tau_grid.begin(), tau_grid.end());
  out.values.resize(tau_grid.size());
  double t = 0.0;
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    propagate(x, gen, tau_grid[i] - t);
    t = tau_grid[i];
    out.values[i] = gen.kappa * (w.transpose() * x).value().real();
  }
  out.meta.set("kappa", gen.kappa);
  out.meta.set("fock_dim", gen.ops.fock_dim);
  return out;
}

SpectrumRecord regression_spectrum(const DensityOperator& steady, const Generator& gen,
                                   std::span<const double> omegas,
                                   const RegressionOptions& options) {
  if (steady.dim() != gen.dim()) throw ParameterError("state dimension does not match generator");
  const double h = gen.max_step();
  const auto window_steps = std::max<long>(1, static_cast<long>(std::ceil(options.window / h)));
  const auto max_steps = static_cast<long>(std::ceil(options.max_tau / h));

  Vector x = fluctuation_operator(steady, gen);
  const Vector w = adag_trace_weights(gen);
  const SparseMatrix& L = gen.liouvillian;
  Vector k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), tmp(x.size());

  std::vector<double> samples;
  samples.push_back(gen.kappa * (w.transpose() * x).value().real());
  const double k0 = std::abs(samples.front());
  double window_max = 0.0;
  for (long s = 1; s <= max_steps; ++s) {
    k1.noalias() = L * x;
    tmp = x + (0.5 * h) * k1;
    k2.noalias() = L * tmp;
    tmp = x + (0.5 * h) * k2;
    k3.noalias() = L * tmp;
    tmp = x + h * k3;
    k4.noalias() = L * tmp;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double v = gen.kappa * (w.transpose() * x).value().real();
    if (!std::isfinite(v)) throw IntegrationError("regression correlator diverged", 0.5 * h);
    samples.push_back(v);
    window_max = std::max(window_max, std::abs(v));
    if (s % window_steps == 0) {
      if (window_max < options.decay_tolerance * k0) break;
      window_max = 0.0;
    }
  }
  SpectrumRecord s = field_record(omegas, fourier::cosine_transform(samples, h, omegas));
  s.meta.set("tau_max_s", h * static_cast<double>(samples.size() - 1));
  s.meta.set("rk4_step_s", h);
  s.meta.set("fock_dim", gen.ops.fock_dim);
  return s;
}

SpectrumRecord resolvent_spectrum(const DensityOperator& steady, const Generator& gen,
                                  std::span<const double> omegas) {
  const Vector x = fluctuation_operator(steady, gen);
  const Vector w = adag_trace_weights(gen);
  std::vector<double> out(omegas.size());
  Eigen::SparseLU<SparseMatrix> lu;
  const double scale = std::max(gen.liouvillian.coeffs().cwiseAbs().maxCoeff(), 1.0);
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (std::abs(omegas[i]) < 1e-12 * scale) {
      // L is singular; x is traceless, so drop one (redundant) equation in
      // favour of tr y = 0.
      const int d = gen.dim();
      std::vector<Eigen::Triplet<cplx>> trip;
      const SparseMatrix& L = gen.liouvillian;
      for (int k = 0; k < L.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(L, k); it; ++it)
          if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
      for (int j = 0; j < d; ++j) trip.emplace_back(0, j * (d + 1), 1.0);
      SparseMatrix M(L.rows(), L.cols());
      M.setFromTriplets(trip.begin(), trip.end());
      M.makeCompressed();
      lu.compute(M);
      if (lu.info() != Eigen::Success) throw Error("resolvent factorization failed");
      Vector rhs = -x;
      rhs[0] = 0.0;
      const Vector y = lu.solve(rhs);
      out[i] = 2.0 * gen.kappa * (w.transpose() * y).value().real();
      continue;
    }
    double acc = 0.0;
    for (double sign : {1.0, -1.0}) {
      // (i w - L)^{-1} = -(L - i w)^{-1}
      lu.compute(shifted(gen.liouvillian, cplx(0.0, sign * omegas[i])));
      if (lu.info() != Eigen::Success) throw Error("resolvent factorization failed");
      const Vector y = -lu.solve(x);
      acc += (w.transpose() * y).value().real();
    }
    out[i] = gen.kappa * acc;
  }
  SpectrumRecord s = field_record(omegas, std::move(out));
  s.meta.set("fock_dim", gen.ops.fock_dim);
  return s;
}

cplx nearest_eigenvalue(const Generator& gen, cplx shift) {
  const SparseMatrix& L = gen.liouvillian;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(shifted(L, shift));
  if (lu.info() != Eigen::Success) return shift;  // shift is itself an eigenvalue
  const Eigen::Index n = L.rows();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * static_cast<double>(i)),
                0.21 * std::cos(0.7 * static_cast<double>(i)));
  v.normalize();
  cplx mu = shift;
  for (int it = 0; it < 300; ++it) {
    Vector y = lu.solve(v);
    y.normalize();
    const cplx next = y.dot(L * y);  // Rayleigh quotient (y normalized)
    v = std::move(y);
    if (it > 2 && std::abs(next - mu) < 1e-13 * std::max(std::abs(next), 1.0)) {
      mu = next;
      break;
    }
    mu = next;
  }
  return mu;
}

RabiCalibration calibrate_rabi_drive(const std::function<Generator(double)>& build,
                                     double eps_d_start, double target_osc_sq,
                                     double gamma_guess, int max_iterations) {
  RabiCalibration cal;
  cal.eps_d = eps_d_start;
  cal.target_osc_sq = target_osc_sq;
  cplx g1, g2;
  if (target_osc_sq >= 0.0) {
    const double w = std::sqrt(target_osc_sq);
    g1 = cplx(-gamma_guess, w);
    g2 = cplx(-gamma_guess, -w);
  } else {
    const double s = std::sqrt(-target_osc_sq);
    g1 = cplx(-gamma_guess + s, 0.0);
    g2 = cplx(-gamma_guess - s, 0.0);
  }
  for (int it = 0; it < max_iterations; ++it) {
    const Generator gen = build(cal.eps_d);
    cal.eig_plus = nearest_eigenvalue(gen, g1);
    cal.eig_minus = nearest_eigenvalue(gen, g2);
    const cplx half = 0.5 * (cal.eig_plus - cal.eig_minus);
    cal.numeric_osc_sq = -(half * half).real();
    cal.iterations = it + 1;
    const double miss = target_osc_sq - cal.numeric_osc_sq;
    if (std::abs(miss) <= 1e-10 * std::max(std::abs(target_osc_sq), 1.0)) break;
    const double e2 = cal.eps_d * cal.eps_d + 0.25 * miss;
    cal.eps_d = std::sqrt(std::max(e2, 0.0));
    // Track the pair as it moves.
    g1 = cal.eig_plus;
    g2 = cal.eig_minus;
  }
  return cal;
}

}  // namespace lgsim::lindblad

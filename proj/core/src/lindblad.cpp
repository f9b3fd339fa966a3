#include "lgsim/lindblad.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "lgsim/errors.hpp"

namespace lgsim::lindblad {

namespace {

using Triplet = Eigen::Triplet<cplx>;

SparseMatrix sparse_identity(int n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  out.makeCompressed();
  return out;
}

SparseMatrix transpose(const SparseMatrix& a) { return SparseMatrix(a.transpose()); }
SparseMatrix adjoint(const SparseMatrix& a) { return SparseMatrix(a.adjoint()); }
SparseMatrix conjugate(const SparseMatrix& a) { return SparseMatrix(a.conjugate()); }

// D[c] as a superoperator (column stacking).
SparseMatrix dissipator(const SparseMatrix& c) {
  const int d = static_cast<int>(c.rows());
  const SparseMatrix I = sparse_identity(d);
  const SparseMatrix cdc = adjoint(c) * c;
  return kron(conjugate(c), c) - 0.5 * kron(I, cdc) - 0.5 * kron(transpose(cdc), I);
}

double gershgorin_bound(const SparseMatrix& h) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.maxCoeff();
}

void check_fock(int fock_dim, double nbar, std::vector<std::string>& warnings) {
  if (nbar <= 0.0) return;
  const int rec = HilbertConfig::recommended_fock_dim(nbar);
  const int min = HilbertConfig::minimum_fock_dim(nbar);
  if (fock_dim < min) {
    std::ostringstream os;
    os << "fock_dim " << fock_dim << " is too small for nbar " << nbar << " (need >= " << rec
       << ")";
    throw TruncationError(os.str());
  }
  if (fock_dim < rec) {
    std::ostringstream os;
    os << "fock_dim " << fock_dim << " below recommended " << rec << " for nbar " << nbar;
    warnings.push_back(os.str());
  }
}

// Cavity alone with frequency offset `detuning` in the drive frame.
Eigen::VectorXcd cavity_steady_vec(int n, double detuning, double eps, double kappa) {
  SparseMatrix a(n, n);
  std::vector<Triplet> t;
  for (int k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  a.setFromTriplets(t.begin(), t.end());
  const SparseMatrix ad = adjoint(a);
  const SparseMatrix h = detuning * SparseMatrix(ad * a) + eps * SparseMatrix(a + ad);
  const SparseMatrix I = sparse_identity(n);
  SparseMatrix L = cplx(0.0, -1.0) * (kron(I, h) - kron(transpose(h), I)) +
                   kappa * dissipator(a);
  const int d2 = n * n;
  std::vector<Triplet> trip;
  for (int k = 0; k < L.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(L, k); it; ++it)
      if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) trip.emplace_back(0, i * (n + 1), 1.0);
  SparseMatrix M(d2, d2);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw Error("cavity steady-state factorization failed");
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(d2);
  b[0] = 1.0;
  return lu.solve(b);
}

}  // namespace

void HilbertConfig::validate() const {
  if (fock_dim < 2) throw ParameterError("fock_dim must be >= 2");
  if (!std::isfinite(qubit_detuning) || !std::isfinite(cavity_detuning))
    throw ParameterError("frame detunings must be finite");
}

int HilbertConfig::recommended_fock_dim(double nbar) {
  return static_cast<int>(std::ceil(nbar + 5.0 * std::sqrt(nbar) + 5.0));
}

int HilbertConfig::minimum_fock_dim(double nbar) {
  return static_cast<int>(std::ceil(nbar + 2.0 * std::sqrt(nbar) + 2.0));
}

void DriveAmplitudes::validate() const {
  if (!(eps_m >= 0.0) || !(eps_d >= 0.0)) throw ParameterError("drive amplitudes must be >= 0");
}

double DriveAmplitudes::eps_for_nbar(double nbar, double kappa) {
  if (!(nbar >= 0.0) || !(kappa > 0.0)) throw ParameterError("need nbar >= 0 and kappa > 0");
  return 0.5 * kappa * std::sqrt(nbar);
}

Operators Operators::make(int n) {
  if (n < 2) throw ParameterError("fock_dim must be >= 2");
  Operators o;
  o.fock_dim = n;
  SparseMatrix a(n, n);
  {
    std::vector<Triplet> t;
    for (int k = 1; k < n; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
    a.setFromTriplets(t.begin(), t.end());
  }
  SparseMatrix sm(2, 2), sz(2, 2), sx(2, 2), sy(2, 2);
  {
    std::vector<Triplet> t{{0, 1, 1.0}};
    sm.setFromTriplets(t.begin(), t.end());
  }
  {
    std::vector<Triplet> t{{0, 0, -1.0}, {1, 1, 1.0}};
    sz.setFromTriplets(t.begin(), t.end());
  }
  {
    std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, 1.0}};
    sx.setFromTriplets(t.begin(), t.end());
  }
  {
    // sigma_y = i(s- - s+) in this basis: <g|sy|e> = i, <e|sy|g> = -i
    std::vector<Triplet> t{{0, 1, cplx(0.0, 1.0)}, {1, 0, cplx(0.0, -1.0)}};
    sy.setFromTriplets(t.begin(), t.end());
  }
  const SparseMatrix Iq = sparse_identity(2), Ic = sparse_identity(n);
  o.a = kron(Iq, a);
  o.adag = adjoint(o.a);
  o.number = o.adag * o.a;
  o.sigma_minus = kron(sm, Ic);
  o.sigma_z = kron(sz, Ic);
  o.sigma_x = kron(sx, Ic);
  o.sigma_y = kron(sy, Ic);
  o.identity = sparse_identity(2 * n);
  return o;
}

DensityOperator::DensityOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ParameterError("density operator must be square");
}

DensityOperator DensityOperator::from_vector(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim)
    throw ParameterError("vector length does not match dimension");
  return DensityOperator(Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim));
}

DensityOperator DensityOperator::basis_state(int fock_dim, int qubit, int photons) {
  if (qubit < 0 || qubit > 1 || photons < 0 || photons >= fock_dim)
    throw ParameterError("basis state out of range");
  const int d = 2 * fock_dim;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  const int i = qubit * fock_dim + photons;
  m(i, i) = 1.0;
  return DensityOperator(std::move(m));
}

Vector DensityOperator::vec() const {
  return Eigen::Map<const Vector>(m_.data(), m_.size());
}

double DensityOperator::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityOperator::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

cplx DensityOperator::expect(const SparseMatrix& op) const {
  cplx acc = 0.0;
  // tr(op rho) = sum_{ij} op_ij rho_ji
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op, k); it; ++it) acc += it.value() * m_(it.col(), it.row());
  return acc;
}

double DensityOperator::trace_distance(const DensityOperator& other) const {
  const Eigen::MatrixXcd d = m_ - other.m_;
  const Eigen::MatrixXcd h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

void DensityOperator::check_invariants(double step_hint, bool check_positivity) const {
  if (std::abs(trace() - 1.0) > 1e-8)
    throw IntegrationError("trace drifted from 1", step_hint);
  if (hermiticity_error() > 1e-10) throw IntegrationError("state lost Hermiticity", step_hint);
  if (check_positivity && min_eigenvalue() < -1e-8)
    throw IntegrationError("state lost positivity", step_hint);
}

double Generator::max_step() const {
  double m = 2.0 * 3.14159265358979323846 / std::max(omega_max, 1e-300);
  if (kappa > 0.0) m = std::min(m, 1.0 / kappa);
  if (gamma1 > 0.0) m = std::min(m, 1.0 / gamma1);
  return m / 40.0;
}

Generator build_generator(const TlsParams& tls, const CavityParams& cavity,
                          const HilbertConfig& hilbert, const DriveAmplitudes& drives) {
  tls.validate();
  cavity.validate();
  hilbert.validate();
  drives.validate();

  Generator g;
  g.ops = Operators::make(hilbert.fock_dim);
  g.kappa = cavity.kappa;
  g.gamma1 = tls.gamma1;
  g.gamma_phi0 = tls.gamma_phi0;

  const double chi = cavity.chi0;
  const double k2 = 0.25 * cavity.kappa * cavity.kappa;
  const double dg = hilbert.cavity_detuning - chi;
  const double de = hilbert.cavity_detuning + chi;
  const double e2 = drives.eps_m * drives.eps_m;
  g.nbar_estimate = std::max(e2 / (dg * dg + k2), e2 / (de * de + k2));
  check_fock(hilbert.fock_dim, g.nbar_estimate, g.warnings);

  const Operators& o = g.ops;
  const SparseMatrix nz = o.number * o.sigma_z;
  SparseMatrix h = (0.5 * hilbert.qubit_detuning) * o.sigma_z +
                   hilbert.cavity_detuning * o.number + chi * nz +
                   drives.eps_m * SparseMatrix(o.a + o.adag) + drives.eps_d * o.sigma_x;
  h.prune(cplx(0.0));
  h.makeCompressed();
  g.hamiltonian = h;
  g.omega_max = gershgorin_bound(h);

  const int d = o.dim();
  const SparseMatrix I = sparse_identity(d);
  SparseMatrix L = cplx(0.0, -1.0) * (kron(I, h) - kron(transpose(h), I));
  L += cavity.kappa * dissipator(o.a);
  if (tls.gamma1 > 0.0) L += tls.gamma1 * dissipator(o.sigma_minus);
  if (tls.gamma_phi0 > 0.0) L += (0.5 * tls.gamma_phi0) * dissipator(o.sigma_z);
  L.prune(cplx(0.0));
  L.makeCompressed();
  g.liouvillian = std::move(L);
  return g;
}

void propagate(Vector& v, const Generator& gen, double duration) {
  if (duration <= 0.0) return;
  const double hmax = gen.max_step();
  const auto steps = static_cast<long>(std::ceil(duration / hmax - 1e-12));
  const double h = duration / static_cast<double>(steps);
  Vector k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size()), tmp(v.size());
  const SparseMatrix& L = gen.liouvillian;
  for (long s = 0; s < steps; ++s) {
    k1.noalias() = L * v;
    tmp = v + (0.5 * h) * k1;
    k2.noalias() = L * tmp;
    tmp = v + (0.5 * h) * k2;
    k3.noalias() = L * tmp;
    tmp = v + h * k3;
    k4.noalias() = L * tmp;
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

void evolve_observe(const DensityOperator& rho0, const Generator& gen,
                    std::span<const double> t_grid, const Observer& observer,
                    bool check_positivity) {
  if (rho0.dim() != gen.dim()) throw ParameterError("state dimension does not match generator");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw GridError("t_grid must be increasing");
  rho0.check_invariants(gen.max_step(), true);

  Vector v = rho0.vec();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0) propagate(v, gen, t_grid[i] - t_grid[i - 1]);
    DensityOperator rho = DensityOperator::from_vector(v, gen.dim());
    rho.check_invariants(0.5 * gen.max_step(), check_positivity);
    observer(i, rho);
  }
}

std::vector<DensityOperator> evolve(const DensityOperator& rho0, const Generator& gen,
                                    std::span<const double> t_grid) {
  std::vector<DensityOperator> out;
  out.reserve(t_grid.size());
  evolve_observe(rho0, gen, t_grid,
                 [&](std::size_t, const DensityOperator& rho) { out.push_back(rho); });
  return out;
}

DensityOperator steady_state(const Generator& gen) {
  const SparseMatrix& L = gen.liouvillian;
  const int d = gen.dim();
  const int d2 = d * d;

  // Replace one equation by the trace condition; solve twice with different
  // replaced rows. A unique null vector gives the same answer both times.
  auto solve_with_row = [&](int row) {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(L.nonZeros()) + static_cast<std::size_t>(d));
    for (int k = 0; k < L.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(L, k); it; ++it)
        if (it.row() != row) trip.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < d; ++i) trip.emplace_back(row, i * (d + 1), 1.0);
    SparseMatrix M(d2, d2);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw Error("steady state: null space is degenerate");
    Vector b = Vector::Zero(d2);
    b[row] = 1.0;
    Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
      throw Error("steady state: null space is degenerate");
    return x;
  };

  const Vector x0 = solve_with_row(0);
  const Vector x1 = solve_with_row(d2 - 1);
  DensityOperator r0 = DensityOperator::from_vector(x0, d);
  DensityOperator r1 = DensityOperator::from_vector(x1, d);
  const double resid = (L * x0).cwiseAbs().maxCoeff();
  const double scale = std::max(L.coeffs().cwiseAbs().maxCoeff(), 1.0);
  if (r0.trace_distance(r1) > 1e-6 || resid > 1e-9 * scale)
    throw Error("steady state: null space is degenerate");

  Eigen::MatrixXcd m = 0.5 * (r0.matrix() + r0.matrix().adjoint());
  m /= m.trace();
  return DensityOperator(std::move(m));
}

SpinTrajectory bloch_trajectory(const DensityOperator& rho0, const Generator& gen,
                                std::span<const double> t_grid) {
  SpinTrajectory traj;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.xyz.resize(t_grid.size());
  evolve_observe(rho0, gen, t_grid, [&](std::size_t i, const DensityOperator& rho) {
    traj.xyz[i] = {rho.expect(gen.ops.sigma_x).real(), rho.expect(gen.ops.sigma_y).real(),
                   rho.expect(gen.ops.sigma_z).real()};
  });
  return traj;
}

double output_scale(double kappa) {
  if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
  return 0.5 * std::sqrt(kappa);
}

DeltaV simulate_deltaV(const TlsParams& tls, const CavityParams& cavity,
                       const HilbertConfig& hilbert, double eps_m) {
  tls.validate();
  cavity.validate();
  hilbert.validate();
  if (!(eps_m >= 0.0)) throw ParameterError("eps_m must be >= 0");
  DeltaV out;
  const int n = hilbert.fock_dim;
  const double chi = cavity.chi0;
  const double k2 = 0.25 * cavity.kappa * cavity.kappa;
  const double dg = hilbert.cavity_detuning - chi, de = hilbert.cavity_detuning + chi;
  const double e2 = eps_m * eps_m;
  check_fock(n, std::max(e2 / (dg * dg + k2), e2 / (de * de + k2)), out.warnings);

  auto moments = [&](double detuning, cplx& alpha, double& nbar) {
    const Eigen::VectorXcd v = cavity_steady_vec(n, detuning, eps_m, cavity.kappa);
    const Eigen::Map<const Eigen::MatrixXcd> rho(v.data(), n, n);
    alpha = 0.0;
    nbar = 0.0;
    for (int k = 1; k < n; ++k) alpha += std::sqrt(static_cast<double>(k)) * rho(k, k - 1);
    for (int k = 0; k < n; ++k) nbar += static_cast<double>(k) * rho(k, k).real();
    nbar /= rho.trace().real();
    alpha /= rho.trace();
  };
  moments(dg, out.alpha_g, out.nbar_g);
  moments(de, out.alpha_e, out.nbar_e);
  out.delta_v = 2.0 * std::abs(out.alpha_g - out.alpha_e) * output_scale(cavity.kappa);
  out.phase = std::arg(out.alpha_g * std::conj(out.alpha_e));
  return out;
}

double dispersive_correction(double chi0, double lambda, double nbar) {
  if (!(lambda >= 0.0) || !(nbar >= 0.0)) throw ParameterError("need lambda >= 0 and nbar >= 0");
  if (lambda * nbar >= 1.0) throw ValidityError("dispersive correction invalid for lambda nbar >= 1");
  return chi0 * (1.0 - lambda * nbar);
}

double corrected_output(double delta_v, double lambda, double nbar) {
  if (!(lambda >= 0.0) || !(nbar >= 0.0)) throw ParameterError("need lambda >= 0 and nbar >= 0");
  if (lambda * nbar >= 1.0) throw ValidityError("dispersive correction invalid for lambda nbar >= 1");
  return delta_v * (1.0 - lambda * nbar);
}

}  // namespace lgsim::lindblad

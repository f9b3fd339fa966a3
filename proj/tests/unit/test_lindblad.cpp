#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/lindblad.hpp"
#include "lgsim/units.hpp"

using namespace lgsim;
using namespace lgsim::lindblad;
using doctest::Approx;

namespace {

const double kappa = units::mhz_to_rad(30.3);
const double chi = units::mhz_to_rad(1.75);

CavityParams cavity(double c = chi) { return {0.0, kappa, c, 0.0, 100.0}; }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return t;
}

double trace_of(const Vector& v, int d) {
  std::complex<double> t = 0;
  for (int i = 0; i < d; ++i) t += v[i * (d + 1)];
  return std::abs(t);
}

}  // namespace

TEST_CASE("operators") {
  auto o = Operators::make(6);
  Eigen::MatrixXcd a = Eigen::MatrixXcd(o.a), ad = Eigen::MatrixXcd(o.adag);
  Eigen::MatrixXcd comm = a * ad - ad * a;
  // [a, a^dag] = 1 except on the truncation edge.
  for (int q = 0; q < 2; ++q)
    for (int n = 0; n < 5; ++n) CHECK(std::abs(comm(q * 6 + n, q * 6 + n) - 1.0) < 1e-14);
  Eigen::MatrixXcd sz = Eigen::MatrixXcd(o.sigma_z);
  CHECK(sz(0, 0).real() == -1.0);
  CHECK(sz(6, 6).real() == 1.0);
  Eigen::MatrixXcd sx = o.sigma_x, sy = o.sigma_y;
  Eigen::MatrixXcd c = sx * sy - sy * sx;
  // [sx, sy] = 2i sz
  CHECK((c - std::complex<double>(0, 2) * sz).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("generator structure") {
  TlsParams tls{0.0, 1 / 200e-9, 2e6, 0.0};
  auto gen = build_generator(tls, cavity(), {8, 1e6, -2e6},
                             {DriveAmplitudes::eps_for_nbar(0.5, kappa), 3e7});
  const int d = gen.dim();
  // Trace preservation for random operators.
  Vector v = Vector::Random(d * d);
  Vector lv = gen.apply(v);
  std::complex<double> t = 0;
  for (int i = 0; i < d; ++i) t += lv[i * (d + 1)];
  CHECK(std::abs(t) < 1e-12 * lv.cwiseAbs().maxCoeff());

  // Nothing driven or damped: every diagonal state is stationary.
  auto idle = build_generator(TlsParams{}, CavityParams{0, kappa, 0.0, 0, 100}, {4, 0, 0}, {0, 0});
  Vector lvec = idle.apply(DensityOperator::basis_state(4, 1, 0).vec());
  // Only the cavity damping can act and |e,0> has no photons.
  CHECK(lvec.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(gen.max_step() <= 1 / (40 * kappa) + 1e-20);
}

TEST_CASE("truncation rules") {
  CHECK(HilbertConfig::recommended_fock_dim(0.78) == 11);
  CHECK(HilbertConfig::minimum_fock_dim(3.9) == 10);
  TlsParams tls{0.0, 1 / 200e-9, 0.0, 0.0};
  const double eps = DriveAmplitudes::eps_for_nbar(3.9, kappa);
  CHECK_THROWS_AS(build_generator(tls, cavity(), {6, 0, 0}, {eps, 0}), TruncationError);
  auto g = build_generator(tls, cavity(), {14, 0, 0}, {eps, 0});
  CHECK_FALSE(g.warnings.empty());
  auto ok = build_generator(tls, cavity(), {19, 0, 0}, {eps, 0});
  CHECK(ok.warnings.empty());
}

TEST_CASE("qubit dynamics without photons follows the Bloch equations") {
  TlsParams tls{0.0, 1 / 200e-9, 1 / 300e-9, 0.0};
  const double wr = units::mhz_to_rad(7.0);
  auto gen = build_generator(tls, cavity(), {2, 0, 0}, {0.0, wr / 2});
  auto t = linspace(0.0, 600e-9, 61);
  auto num = bloch_trajectory(DensityOperator::basis_state(2, 0, 0), gen, t);
  auto ref = qubit::bloch_evolve(tls, DriveParams{wr, 0, 0}, tls.gamma1 / 2 + tls.gamma_phi0, -1.0, t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(num.xyz[i].z == Approx(ref.xyz[i].z).epsilon(1e-7).scale(1.0));
    CHECK(std::abs(num.xyz[i].y) == Approx(std::abs(ref.xyz[i].y)).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("undriven decay and cavity switch-on") {
  TlsParams tls{0.0, 1 / 200e-9, 0.0, 0.0};
  auto gen = build_generator(tls, cavity(0.0), {2, 0, 0}, {0, 0});
  auto t = linspace(0.0, 400e-9, 5);
  auto rhos = evolve(DensityOperator::basis_state(2, 1, 0), gen, t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double pe = 0.5 * (1 + rhos[i].expect(gen.ops.sigma_z).real());
    CHECK(pe == Approx(std::exp(-tls.gamma1 * t[i])).epsilon(1e-6).scale(1.0));
  }

  const double eps = DriveAmplitudes::eps_for_nbar(1.0, kappa);
  auto cav = build_generator(tls, cavity(0.0), {12, 0, 0}, {eps, 0});
  auto t2 = linspace(0.0, 40e-9, 9);
  auto states = evolve(DensityOperator::basis_state(12, 0, 0), cav, t2);
  const std::complex<double> a_inf(0.0, -2 * eps / kappa);
  for (std::size_t i = 0; i < t2.size(); ++i) {
    const auto a = states[i].expect(cav.ops.a);
    const auto expect = a_inf * (1.0 - std::exp(-kappa / 2 * t2[i]));
    CHECK(std::abs(a - expect) < 1e-5);
  }
}

TEST_CASE("steady states") {
  TlsParams tls{0.0, 1 / 200e-9, 0.0, 0.0};
  {
    auto gen = build_generator(tls, cavity(), {4, 0, 0}, {0, 0});
    auto ss = steady_state(gen);
    CHECK(std::abs(ss.matrix()(0, 0) - 1.0) < 1e-10);
  }
  {
    // Driven qubit with intrinsic dephasing and no photons.
    TlsParams t2{0.0, 1 / 200e-9, 1 / 400e-9, 0.0};
    const double wr = units::mhz_to_rad(2.0);
    auto gen = build_generator(t2, cavity(), {2, 0, 0}, {0, wr / 2});
    auto ss = steady_state(gen);
    const double pe = 0.5 * (1 + ss.expect(gen.ops.sigma_z).real());
    const double g2 = t2.gamma1 / 2 + t2.gamma_phi0;
    CHECK(pe == Approx(qubit::saturation_population(0.0, wr, t2.gamma1, g2, 0.0)).epsilon(0.01));
    auto t = linspace(0.0, 6e-6, 3);
    auto rhos = evolve(DensityOperator::basis_state(2, 0, 0), gen, t);
    CHECK(rhos.back().trace_distance(ss) < 1e-6);
  }
  {
    const double eps = DriveAmplitudes::eps_for_nbar(0.8, kappa);
    auto gen = build_generator(tls, cavity(), {12, 0, 0}, {eps, units::mhz_to_rad(5)});
    auto ss = steady_state(gen);
    CHECK(ss.hermiticity_error() < 1e-10);
    CHECK(std::abs(ss.trace() - 1.0) < 1e-10);
    CHECK(ss.min_eigenvalue() > -1e-8);
    CHECK(trace_of(gen.apply(ss.vec()), gen.dim()) < 1e-6);
  }
}

TEST_CASE("pointer states and deltaV") {
  TlsParams tls{0.0, 1 / 200e-9, 0.0, 0.0};
  const double eps = DriveAmplitudes::eps_for_nbar(0.78, kappa);
  auto dv = simulate_deltaV(tls, cavity(), {12, 0, 0}, eps);
  // Coherent pointer states: alpha = -i eps / (kappa/2 + i (+-chi)).
  const std::complex<double> i(0, 1);
  const auto ag = -i * eps / (kappa / 2 - i * chi);
  const auto ae = -i * eps / (kappa / 2 + i * chi);
  CHECK(std::abs(dv.alpha_g - ag) < 1e-6);
  CHECK(std::abs(dv.alpha_e - ae) < 1e-6);
  CHECK(std::abs(dv.phase) == Approx(qubit::dispersive_phase_shift(chi, kappa)).epsilon(0.01));
  CHECK(dv.nbar_g == Approx(eps * eps / (kappa * kappa / 4 + chi * chi)).epsilon(1e-6));
  CHECK(dv.delta_v == Approx(std::sqrt(kappa) * std::abs(ag - ae)).epsilon(1e-6));

  auto dv4 = simulate_deltaV(tls, cavity(), {24, 0, 0}, 2 * eps);
  CHECK(dv4.delta_v / dv.delta_v == Approx(2.0).epsilon(1e-5));
  auto none = simulate_deltaV(tls, cavity(0.0), {12, 0, 0}, eps);
  CHECK(none.delta_v < 1e-12);
}

TEST_CASE("dispersive correction") {
  CHECK(dispersive_correction(chi, 7e-3, 0.0) == chi);
  CHECK(dispersive_correction(chi, 7e-3, 15.0) == Approx(chi * (1 - 0.105)));
  CHECK(dispersive_correction(chi, 0.0, 50.0) == chi);
  CHECK(corrected_output(2.0, 7e-3, 15.0) == Approx(2.0 * 0.895));
  CHECK_THROWS_AS(dispersive_correction(chi, 0.1, 10.0), ValidityError);
}

TEST_CASE("regression correlator and spectra") {
  TlsParams tls{0.0, 1 / 200e-9, 0.0, 0.0};
  const double nbar = 0.23;
  const double wr = units::mhz_to_rad(5.0);
  const double eps = DriveAmplitudes::eps_for_nbar(nbar, kappa);
  const int n = HilbertConfig::recommended_fock_dim(nbar);
  const double nm = eps * eps / (kappa * kappa / 4 + chi * chi);
  auto gen = build_generator(tls, cavity(), {n, -2 * chi * nm, 0}, {eps, wr / 2});
  auto ss = steady_state(gen);

  std::vector<double> w;
  for (int k = 0; k < 40; ++k) w.push_back(units::mhz_to_rad(0.5 * k));
  auto reg = regression_spectrum(ss, gen, w);
  auto res = resolvent_spectrum(ss, gen, w);
  const double peak = *std::max_element(res.density.begin(), res.density.end());
  for (std::size_t k = 0; k < w.size(); ++k)
    CHECK(reg.density[k] == Approx(res.density[k]).epsilon(1e-4).scale(peak));

  // Spin units: K'(0) / (dV/2)^2 equals the area of the filtered theory
  // spectrum, i.e. 1 - z^2 reduced by the cavity bandwidth.
  auto dv = simulate_deltaV(tls, cavity(), {n, 0, 0}, eps);
  const double scale = std::pow(dv.delta_v / 2, 2);
  auto p = analytic::FiniteBandwidthParams{wr, tls.gamma1, 8 * nm * chi * chi / kappa, kappa};
  const std::vector<double> tau{0.0};
  auto k0 = two_time_correlator(ss, gen, tau);
  double area = 0;
  const double dw = 2e4;
  for (int k = 0; k < 2000000; ++k) area += (k == 0 ? 0.5 : 1.0) * analytic::finite_bandwidth_spectrum(k * dw, p) * dw;
  area /= std::numbers::pi;
  CHECK(k0.values[0] / scale == Approx(area).epsilon(0.03));

  // Spin-units spectrum against the finite-bandwidth theory.
  double num = 0, den = 0;
  for (std::size_t k = 1; k < w.size(); ++k) {
    const double a = analytic::finite_bandwidth_spectrum(w[k], p);
    num += std::abs(res.density[k] / scale - a);
    den += a;
  }
  CHECK(num / den < 0.05);

  // chi = 0: no qubit signal in the field fluctuations (up to truncation).
  auto free = build_generator(tls, cavity(0.0), {n, 0, 0}, {eps, wr / 2});
  auto fss = steady_state(free);
  auto fres = resolvent_spectrum(fss, free, w);
  for (double v : fres.density) CHECK(std::abs(v) < 1e-6 * peak);
}

TEST_CASE("eigenvalue search finds the Rabi pair") {
  TlsParams tls{0.0, 1 / 200e-9, 1 / 300e-9, 0.0};
  const double wr = units::mhz_to_rad(7.0);
  auto gen = build_generator(tls, cavity(), {2, 0, 0}, {0.0, wr / 2});
  const double g2 = tls.gamma1 / 2 + tls.gamma_phi0;
  const double gam = (tls.gamma1 + g2) / 2;
  const double w2 = wr * wr - std::pow(g2 - tls.gamma1, 2) / 4;
  auto lam = nearest_eigenvalue(gen, {-gam, std::sqrt(w2) * 1.02});
  CHECK(lam.real() == Approx(-gam).epsilon(1e-8));
  CHECK(lam.imag() == Approx(std::sqrt(w2)).epsilon(1e-8));

  auto cal = calibrate_rabi_drive(
      [&](double e) { return build_generator(tls, cavity(), {2, 0, 0}, {0.0, e}); }, wr / 2 * 0.9,
      w2, gam);
  CHECK(cal.eps_d == Approx(wr / 2).epsilon(1e-8));
}

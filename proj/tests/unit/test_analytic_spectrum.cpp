#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/units.hpp"

using namespace lgsim;
using namespace lgsim::analytic;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;
const double kappa = units::mhz_to_rad(30.3);
const double df = 1.0 / (10e-9 * 1024);

// Regression-theorem spectrum of the bare Bloch equations at zero
// temperature: S(w) = 2 Re[e_z (iw - A)^-1 u], u = e_z - z_st v_st.
double bloch_regression_spectrum(double w, double wr, double g1, double g2) {
  Eigen::Matrix3d A;
  A << -g2, 0, 0, 0, -g2, -wr, 0, wr, -g1;
  Eigen::Vector3d b(0, 0, -g1);
  const Eigen::Vector3d vst = A.partialPivLu().solve(-b);
  Eigen::Vector3d u = Eigen::Vector3d(0, 0, 1) - vst.z() * vst;
  Eigen::Matrix3cd M = std::complex<double>(0, w) * Eigen::Matrix3cd::Identity() - A.cast<std::complex<double>>();
  Eigen::Vector3cd g = M.partialPivLu().solve(u.cast<std::complex<double>>());
  return 2.0 * g.z().real();
}

// (1/2pi) int_-inf^inf S = (1/pi) int_0^inf S for an even S. The half line
// is split at the resonance and at multiples of the narrowest width so the
// adaptive rule sees every peak.
double integrate_spectrum(const std::function<double(double)>& s, double wr, double width) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts{0.0};
  for (double k = 1; k < 1e7; k *= 2) {
    for (double c : {wr - k * width, wr + k * width, k * width})
      if (c > 0) cuts.push_back(c);
  }
  cuts.push_back(wr);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += gauss_kronrod<double, 61>::integrate(s, cuts[i], cuts[i + 1], 10, 1e-13);
  total += gauss_kronrod<double, 61>::integrate(s, cuts.back(), std::numeric_limits<double>::infinity(), 10, 1e-13);
  return total / pi;
}

}  // namespace

TEST_CASE("sigma_z spectrum matches the Bloch regression theorem") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double g1 = 1e6 + 2e7 * u(gen);
    const double g2 = g1 / 2 + 1e8 * u(gen) * u(gen);
    const double wr = units::mhz_to_rad(0.2 + 25 * u(gen));
    for (double w : {0.0, 0.3 * wr, wr, 2.2 * wr, 1e9}) {
      const double ref = bloch_regression_spectrum(w, wr, g1, g2);
      CHECK(sigma_z_spectrum(w, wr, g1, g2) == Approx(ref).epsilon(1e-9).scale(1e-12 / g1));
    }
  }
}

TEST_CASE("sigma_z spectrum shape") {
  const double g1 = 1 / 200e-9;
  const double wr = units::mhz_to_rad(10.0);
  // Weak damping: peak near wR.
  double best_w = 0, best = 0;
  for (int k = 0; k < 4000; ++k) {
    const double w = k * wr / 1000;
    const double s = sigma_z_spectrum(w, wr, g1, 1 / 150e-9);
    if (s > best) best = s, best_w = w;
  }
  CHECK(best_w == Approx(wr).epsilon(0.02));
  // Strong damping: monotone decreasing from zero frequency.
  const double g2 = 50 * wr;
  for (int k = 1; k < 200; ++k)
    CHECK(sigma_z_spectrum(k * 1e6, wr, g1, g2) < sigma_z_spectrum((k - 1) * 1e6, wr, g1, g2));
  CHECK(spectrum_steady_z(wr, g1, 1 / 150e-9) == Approx(-0.0083773).epsilon(1e-4));
}

TEST_CASE("sigma_z spectrum normalization") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double g1 = 1e6 + 2e7 * u(gen);
    const double g2 = g1 / 2 + 1e8 * u(gen);
    const double wr = units::mhz_to_rad(0.5 + 20 * u(gen));
    const double z = spectrum_steady_z(wr, g1, g2);
    const double total = integrate_spectrum([&](double w) { return sigma_z_spectrum(w, wr, g1, g2); }, wr,
                                            std::min(g1, wr * wr / g2 + g1) / 4);
    CHECK(total == Approx(1 - z * z).epsilon(1e-6));
  }
}

TEST_CASE("finite bandwidth spectrum") {
  const double g1 = 1 / 200e-9;
  const double wr = units::mhz_to_rad(10.6);
  auto p = FiniteBandwidthParams::from_gamma2_at_rabi(wr, g1, 1 / 150e-9, kappa);
  CHECK(p.gamma2_at(wr) == Approx(1 / 150e-9).epsilon(1e-12));
  for (double w : {0.0, 1e7, wr, 2e8}) {
    const double c = 1 / (1 + std::pow(2 * w / kappa, 2));
    const double g2 = g1 / 2 + p.gamma_phi * c;
    CHECK(finite_bandwidth_spectrum(w, p) == Approx(c * sigma_z_spectrum(w, wr, g1, g2)));
  }
  FiniteBandwidthParams inf{wr, g1, 1 / 150e-9 - g1 / 2};
  CHECK(finite_bandwidth_spectrum(wr, inf) == Approx(sigma_z_spectrum(wr, wr, g1, 1 / 150e-9)));

  auto phys = FiniteBandwidthParams::from_physical(wr, g1, 1e6, 0.78, units::mhz_to_rad(1.75), kappa);
  CHECK(phys.gamma_phi == Approx(1e6 + 8 * 0.78 * std::pow(units::mhz_to_rad(1.75), 2) / kappa));

  FiniteBandwidthParams bad{wr, -1.0, 0.0, kappa};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("correlator of a Lorentzian is an exponential") {
  // S = 2g / (g^2 + w^2) <-> K = exp(-g |tau|)
  const double g = 2 * pi * 1e6;
  const std::size_t M = 1 << 14;
  auto spec = tabulate([&](double w) { return 2 * g / (g * g + w * w); }, 0.02e6, M);
  auto corr = correlator_from_spectrum(spec);
  CHECK(corr.size() == M + 1);
  const double dtau = 1.0 / (2 * M * 0.02e6);
  CHECK(corr.step() == Approx(dtau));
  for (std::size_t r : {0u, 10u, 100u, 500u}) {
    CHECK(corr.values[r] == Approx(std::exp(-g * corr.taus[r])).epsilon(2e-3).scale(1.0));
  }
  // Forward transform recovers the tabulated spectrum.
  auto back = spectrum_from_correlator(corr);
  REQUIRE(back.size() == M);
  for (std::size_t k : {0u, 7u, 300u}) CHECK(back.density[k] == Approx(spec.density[k]).epsilon(1e-9));
}

TEST_CASE("correlator grid conventions") {
  auto spec = tabulate([](double) { return 1.0; }, df, 308);
  auto corr = correlator_from_spectrum(spec);
  CHECK(units::to_ns(corr.step()) == Approx(16.6234).epsilon(1e-5));
  // Flat spectrum over M bins: K(0) = df (2M - 1) (mirrored, Nyquist zero).
  CHECK(corr.values[0] == Approx(df * (2 * 308 - 1)));
  SpectrumRecord bad = spec;
  bad.freqs[3] += 1.0;
  CHECK_THROWS_AS(correlator_from_spectrum(bad), GridError);
}

TEST_CASE("ideal Leggett-Garg function") {
  const double wr = units::mhz_to_rad(10.6);
  CHECK(ideal_lg(pi / (3 * wr), wr) == Approx(1.5).epsilon(1e-12));
  CHECK(ideal_lg(0.0, wr) == 1.0);
  for (int k = 1; k < 100; ++k) CHECK(ideal_lg(k * 1e-9, wr) <= 1.5 + 1e-12);
}

TEST_CASE("decohered Leggett-Garg maximum at the default operating point") {
  const double wr = units::mhz_to_rad(10.6);
  auto p = FiniteBandwidthParams::from_gamma2_at_rabi(wr, 1 / 200e-9, 1 / 150e-9, kappa);
  auto spec = tabulate([&](double w) { return finite_bandwidth_spectrum(w, p) / qubit::cavity_filter(w, kappa); },
                       df, 308);
  auto curve = leggett_garg_curve(correlator_from_spectrum(spec));
  auto mx = lg_max(curve);
  CHECK(mx.f == Approx(1.3458).epsilon(1e-3));
  CHECK(units::to_ns(mx.tau) == Approx(16.62).epsilon(1e-3));
  CHECK(curve.f[0] == Approx(1.0).epsilon(0.02));
}

TEST_CASE("leggett_garg_curve respects the tau limit") {
  auto spec = tabulate([](double w) { return 2e7 / (1e14 + w * w); }, df, 64);
  auto corr = correlator_from_spectrum(spec);
  auto all = leggett_garg_curve(corr);
  CHECK(all.size() == 33);
  CHECK_FALSE(all.truncated);
  auto some = leggett_garg_curve(corr, 5 * corr.step());
  CHECK(some.size() == 6);
  auto over = leggett_garg_curve(corr, 1.0);
  CHECK(over.truncated);
  for (std::size_t r = 0; r < all.size(); ++r)
    CHECK(all.f[r] == Approx(2 * corr.values[r] - corr.values[2 * r]));
}

TEST_CASE("lg_max tie and edge rules") {
  LgCurve c;
  c.taus = {0, 1, 2, 3, 4};
  c.f = {1.0, 0.5, 0.8, 0.8, 0.1};
  auto m = lg_max(c);
  CHECK(m.index == 2);
  CHECK(m.f == 0.8);  // not a strict maximum, no refinement
  c.f = {1.0, 1.2, 0.9, 0.5, 0.1};
  m = lg_max(c);
  CHECK(m.index == 1);
  CHECK(m.f == 1.2);  // left neighbour is tau = 0
  c.f = {1.0, 1.0, 1.4, 1.2, 0.1};
  m = lg_max(c);
  // parabola through (1, 1.0), (2, 1.4), (3, 1.2): vertex at 2 + 0.5*(1.2-1.0)/(2*1.4-1.0-1.2)
  CHECK(m.tau == Approx(2 + 0.5 * 0.2 / 0.6));
  CHECK(m.f > 1.4);
}

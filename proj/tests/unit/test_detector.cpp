#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/detector.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/units.hpp"

using namespace lgsim;
using namespace lgsim::detector;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;
const double kappa = units::mhz_to_rad(30.3);

AcquisitionConfig small_config(std::size_t n, std::uint64_t seed = 3) {
  AcquisitionConfig c;
  c.n_records = n;
  c.seed = seed;
  return c;
}

SpectrumRecord operating_point_target(const AcquisitionConfig& cfg) {
  const double wr = units::mhz_to_rad(10.6);
  auto p = analytic::FiniteBandwidthParams::from_gamma2_at_rabi(wr, 1 / 200e-9, 1 / 150e-9, kappa);
  return analytic::tabulate(
      [&](double w) { return analytic::finite_bandwidth_spectrum(w, p) / qubit::cavity_filter(w, kappa); },
      cfg.bin_hz(), cfg.record_len / 2 + 1);
}

RawRecord white(std::size_t n, double sd, RecordTag tag, std::uint64_t stream) {
  auto g = rng::Xoshiro256pp::stream(99, stream);
  RawRecord r;
  r.tag = tag;
  r.i.resize(n);
  r.q.resize(n);
  rng::fill_normal(g, r.i);
  rng::fill_normal(g, r.q);
  for (std::size_t k = 0; k < n; ++k) r.i[k] *= sd, r.q[k] *= sd;
  return r;
}

}  // namespace

TEST_CASE("acquisition schedule") {
  AcquisitionConfig c;
  CHECK(c.bin_hz() == 97656.25);
  CHECK(c.settle_samples() == 500);
  CHECK(c.records_per_on_period() == 243);
  CHECK(c.records_per_off_period() == 243);
  c.n_records = 600;
  std::size_t on = 0;
  for (std::size_t i = 0; i < c.total_records(); ++i) on += schedule_tag(c, i) == RecordTag::on;
  CHECK(on == 600);
  CHECK(schedule_tag(c, 0) == RecordTag::on);
  CHECK(schedule_tag(c, 243) == RecordTag::off);
  CHECK(schedule_tag(c, 486) == RecordTag::on);
  for (std::size_t k : {0u, 100u, 300u, 599u}) {
    CHECK(schedule_tag(c, schedule_index(c, RecordTag::on, k)) == RecordTag::on);
    CHECK(schedule_tag(c, schedule_index(c, RecordTag::off, k)) == RecordTag::off);
  }
  c.record_len = 1000;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("periodogram normalization on white noise") {
  const std::size_t n = 1024;
  const double dt = 10e-9, sd = 0.3;
  std::vector<RawRecord> recs;
  for (std::size_t i = 0; i < 400; ++i) recs.push_back(white(n, sd, i % 2 ? RecordTag::off : RecordTag::on, i));
  auto p = accumulate_periodograms(recs, dt);
  CHECK(p.n_on == 200);
  double mean = 0;
  for (std::size_t k = 1; k < n / 2; ++k) mean += p.on.density[k];
  mean /= (n / 2 - 1);
  CHECK(mean == Approx(2 * sd * sd * dt).epsilon(0.01));
  CHECK(p.on.units == SpectralUnits::volts_squared);
}

TEST_CASE("pure tone lands in one bin with Parseval power") {
  const std::size_t n = 1024;
  const double dt = 10e-9, amp = 0.7;
  RawRecord on, off;
  on.tag = RecordTag::on;
  off.tag = RecordTag::off;
  on.i.resize(n);
  on.q.assign(n, 0.0);
  off.i.assign(n, 0.0);
  off.q.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) on.i[k] = amp * std::cos(2 * pi * 37 * k / n);
  const std::vector<RawRecord> recs{on, off};
  auto p = accumulate_periodograms(recs, dt);
  // |X_37|^2 = (amp n / 2)^2
  CHECK(p.on.density[37] == Approx(amp * amp * n * n / 4 * dt / n));
  CHECK(p.on.density[36] < 1e-20);
  // Parseval: sum over the two-sided grid equals mean power / df.
  double total = p.on.density[0] + p.on.density[n / 2];
  for (std::size_t k = 1; k < n / 2; ++k) total += 2 * p.on.density[k];
  CHECK(total * (1.0 / (n * dt)) == Approx(amp * amp / 2));
}

TEST_CASE("mixed record lengths are rejected") {
  std::vector<RawRecord> recs{white(64, 1, RecordTag::on, 0), white(32, 1, RecordTag::off, 1)};
  CHECK_THROWS_AS(accumulate_periodograms(recs, 1e-8), DataError);
}

TEST_CASE("ON-OFF residual of noise is unbiased and shrinks") {
  auto line = LineResponse::flat();
  const std::size_t n = 256;
  auto residual = [&](std::size_t n_rec, std::uint64_t seed) {
    std::vector<RawRecord> recs;
    for (std::size_t i = 0; i < 2 * n_rec; ++i)
      recs.push_back(white(n, 1.0, i % 2 ? RecordTag::off : RecordTag::on, seed * 1000003 + i));
    auto p = accumulate_periodograms(recs, 1e-8);
    auto corr = correct_and_normalize(p.on, p.off, line, 2.0);
    double m = 0, v = 0;
    for (std::size_t k = 1; k < corr.size() - 1; ++k) m += corr.density[k];
    m /= corr.size() - 2;
    for (std::size_t k = 1; k < corr.size() - 1; ++k) v += std::pow(corr.density[k] - m, 2);
    return std::pair{m, std::sqrt(v / (corr.size() - 3))};
  };
  auto [m1, s1] = residual(100, 1);
  auto [m2, s2] = residual(400, 1);
  CHECK(s2 / s1 == Approx(0.5).epsilon(0.1));
  // Each seed's bin mean has standard error s / sqrt(bins).
  double mean = 0, se = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    auto [m, s] = residual(100, seed + 10);
    mean += m;
    se += s;
  }
  mean /= seeds;
  se /= seeds * std::sqrt(127.0 * seeds);
  CHECK(std::abs(mean) < 3 * se);
}

TEST_CASE("correction, deconvolution and cropping") {
  auto line = LineResponse::flat();
  auto s = SpectrumRecord::one_sided(97656.25, 513, SpectralUnits::volts_squared);
  for (auto& d : s.density) d = 3.0;
  auto zero = correct_and_normalize(s, s, line, 0.5);
  for (double d : zero.density) CHECK(d == 0.0);

  auto on = s;
  for (auto& d : on.density) d = 3.0 + 10.29 / 4;
  auto unit = correct_and_normalize(on, s, line, std::sqrt(10.29));
  CHECK(unit.density[5] == Approx(1.0));
  CHECK(unit.units == SpectralUnits::spin_units);

  LineResponse bad{{0.0, 1e6, 2e6}, {1.0, 0.5, 0.0}, {0.0, 0.0, 0.0}};
  CHECK_THROWS(bad.validate());

  auto win = crop(unit, 30e6);
  CHECK(win.size() == 308);
  auto dec = deconvolve_cavity(win, kappa);
  CHECK(dec.density.back() / win.density.back() == Approx(1 + std::pow(2 * 30.0 / 30.3 * (307 * 97656.25 / 30e6), 2)));
  CHECK(1.0 / qubit::cavity_filter(units::mhz_to_rad(30.0), kappa) == Approx(4.92).epsilon(0.002));
  auto same = deconvolve_cavity(win, std::numeric_limits<double>::infinity());
  CHECK(same.density == win.density);
  CHECK_THROWS_AS(deconvolve_cavity(unit, kappa), GridError);
}

TEST_CASE("statistical sigma formula") {
  auto zero = statistical_sigma(0.0, kappa, 308, 97656.25, 155);
  for (double v : zero) CHECK(v == 0.0);
  auto a = statistical_sigma(1.0, kappa, 308, 97656.25, 155);
  auto b = statistical_sigma(2.0, kappa, 308, 97656.25, 155);
  for (std::size_t r = 0; r < a.size(); ++r) CHECK(b[r] == Approx(2 * a[r]));
  // tau = 0: g = 1 for every bin.
  double acc = 1.0;
  for (std::size_t k = 1; k < 308; ++k) {
    const double c = qubit::cavity_filter(units::hz_to_rad(97656.25 * k), kappa);
    acc += 4.0 / (c * c);
  }
  CHECK(a[0] == Approx(97656.25 * std::sqrt(acc)));
}

TEST_CASE("statistical sigma matches a direct Monte-Carlo of the estimator") {
  // Independent Gaussian bin errors with sd sigma0 on the corrected
  // spectrum, pushed through deconvolution, transform and f.
  const std::size_t M = 308;
  const double df = 97656.25, s0 = 2e-9;
  auto sig = statistical_sigma(s0, kappa, M, df, 155);
  auto g = rng::Xoshiro256pp::stream(5, 0);
  const int reps = 800;
  std::vector<double> sum(155, 0.0), sum2(155, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    auto s = SpectrumRecord::one_sided(df, M);
    for (auto& d : s.density) d = s0 * rng::normal(g);
    auto f = analytic::leggett_garg_curve(analytic::correlator_from_spectrum(deconvolve_cavity(s, kappa))).f;
    for (std::size_t r = 0; r < 155; ++r) sum[r] += f[r], sum2[r] += f[r] * f[r];
  }
  for (std::size_t r : {0u, 1u, 5u, 40u}) {
    const double m = sum[r] / reps;
    const double sd = std::sqrt(sum2[r] / reps - m * m);
    CHECK(sd == Approx(sig[r]).epsilon(0.08));
  }
}

TEST_CASE("systematic bounds") {
  auto cfg = small_config(10);
  auto target = operating_point_target(cfg);
  SpectrumRecord corrected = crop(target, 30e6);
  for (std::size_t k = 0; k < corrected.size(); ++k)
    corrected.density[k] *= qubit::cavity_filter(corrected.freqs[k], kappa);
  auto curve = analytic::leggett_garg_curve(
      analytic::correlator_from_spectrum(deconvolve_cavity(corrected, kappa)));
  curve.sigma_stat.assign(curve.size(), 0.0);
  curve.sys_lo = curve.sys_hi = curve.f;

  auto none = systematic_bounds(curve, ErrorBudget::zero(), corrected, kappa);
  for (std::size_t i = 0; i < none.size(); ++i) {
    CHECK(none.sys_lo[i] == none.f[i]);
    CHECK(none.sys_hi[i] == none.f[i]);
  }
  auto parts = systematic_parts(curve, ErrorBudget{}, corrected, kappa);
  auto mx = analytic::lg_max(curve);
  CHECK(parts.flat[mx.index] == Approx(0.076));
  // Exact cavity term at the violation point.
  CHECK(parts.cavity[mx.index] > 0.0);
  CHECK(parts.cavity[mx.index] < 0.03);

  const double big = 1e6 * kappa;
  auto p_inf = systematic_parts(curve, ErrorBudget{}, corrected, big);
  CHECK(p_inf.cavity[mx.index] < 1e-6);
}

TEST_CASE("quantum surrogate round trip") {
  auto cfg = small_config(3000, 21);
  cfg.noise_to_peak = 2.0;
  auto target = operating_point_target(cfg);
  auto line = LineResponse::flat();
  const double dv = 0.01;
  auto src = synthesize_quantum_trace(target, dv, kappa, line, cfg);
  auto p = accumulate_periodograms(*src);
  auto corr = correct_and_normalize(p.on, p.off, line, dv);
  // Per-bin relative sd of the ON-OFF estimate.
  for (std::size_t k : {40u, 109u, 150u}) {
    const double expect = target.density[k] * qubit::cavity_filter(target.freqs[k], kappa);
    const double noise = src->noise_density() * 2 / (dv * dv / 4);
    const double sd = std::sqrt((std::pow(expect + noise, 2) + noise * noise) / 3000.0);
    CHECK(std::abs(corr.density[k] - expect) < 4 * sd);
  }
  auto a = run_lg_analysis(p, line, dv, kappa, ErrorBudget{});
  CHECK(a.k0 == Approx(1.0).epsilon(0.1));
  CHECK(units::to_ns(a.max.tau) == Approx(16.6).epsilon(0.05));
}

TEST_CASE("parallel accumulation is deterministic") {
  auto cfg = small_config(700, 5);
  auto src = synthesize_quantum_trace(operating_point_target(cfg), 0.01, kappa, LineResponse::flat(), cfg);
  auto one = accumulate_periodograms(*src, ParallelOptions{1, 256});
  auto four = accumulate_periodograms(*src, ParallelOptions{4, 256});
  auto three = accumulate_periodograms(*src, ParallelOptions{3, 256});
  CHECK(one.on.density == four.on.density);
  CHECK(one.off.density == three.off.density);
  // Same records, same result as the serial accumulator up to rounding.
  PeriodogramAccumulator acc(cfg.record_len, cfg.dt);
  for (std::size_t i = 0; i < src->size(); ++i) acc.add(src->generate(i));
  auto serial = acc.result();
  for (std::size_t k = 0; k < 513; ++k) CHECK(serial.on.density[k] == Approx(one.on.density[k]).epsilon(1e-12));
  // Split acquisitions merge by count.
  auto a = accumulate_periodograms(*src, 0, 600);
  auto b = accumulate_periodograms(*src, 600, src->size());
  auto m = merge(a, b);
  for (std::size_t k = 0; k < 513; ++k) CHECK(m.on.density[k] == Approx(one.on.density[k]).epsilon(1e-12));
}

TEST_CASE("pipeline linearity") {
  auto cfg = small_config(300, 8);
  auto line = LineResponse::flat();
  auto src = synthesize_quantum_trace(operating_point_target(cfg), 0.01, kappa, line, cfg);
  auto p = accumulate_periodograms(*src);
  auto q = p;
  const double alpha = 3.7;
  for (auto* s : {&q.on, &q.off})
    for (auto& d : s->density) d *= alpha * alpha;
  auto a = run_lg_analysis(p, line, 0.01, kappa, ErrorBudget{});
  auto b = run_lg_analysis(q, line, 0.01 * alpha, kappa, ErrorBudget{});
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(b.curve.f[i] == Approx(a.curve.f[i]).epsilon(1e-10));
}

TEST_CASE("telegraph surrogate") {
  auto cfg = small_config(1500, 4);
  cfg.noise_to_peak = 0.5;
  auto line = LineResponse::flat();
  const double rate = 5e6;
  auto src = synthesize_telegraph_trace(rate, 0.02, std::numeric_limits<double>::infinity(), line, cfg);
  auto p = accumulate_periodograms(*src);
  auto corr = correct_and_normalize(p.on, p.off, line, 0.02);
  // Lorentzian 4r / (4r^2 + w^2): maximum at zero frequency.
  double peak = 0;
  std::size_t at = 0;
  for (std::size_t k = 0; k < 40; ++k)
    if (corr.density[k] > peak) peak = corr.density[k], at = k;
  CHECK(at <= 2);
  auto a = run_lg_analysis(corr, std::numeric_limits<double>::infinity(), ErrorBudget::zero(),
                           AnalysisOptions{cfg.bin_hz() * 512, 22e6, 30e6, 0.1});
  CHECK(a.k0 == Approx(1.0).epsilon(0.05));
  for (std::size_t i = 1; i < a.curve.size(); ++i) CHECK(a.curve.f[i] <= 1.0 + 4 * a.curve.sigma_stat[i] + 0.02);
}

TEST_CASE("macrospin surrogate") {
  auto cfg = small_config(1500, 6);
  cfg.noise_to_peak = 1.0;
  auto line = LineResponse::flat();
  const double wr = units::mhz_to_rad(10.6), g = 1 / 150e-9;
  auto src = synthesize_macrospin_trace(wr, g, 0.02, kappa, line, cfg);
  auto p = accumulate_periodograms(*src);
  auto a = run_lg_analysis(p, line, 0.02, kappa, ErrorBudget{});
  CHECK(a.k0 == Approx(0.5).epsilon(0.1));
  CHECK(a.max.f <= 1.0 + 2 * a.sigma_at_max);
}

#include <benchmark/benchmark.h>

#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/units.hpp"

using namespace lgsim;

static void BM_FiniteBandwidthTabulate(benchmark::State& state) {
  const auto p = analytic::FiniteBandwidthParams::from_gamma2_at_rabi(
      units::mhz_to_rad(10.6), 1 / 200e-9, 1 / 150e-9, units::mhz_to_rad(30.3));
  for (auto _ : state) {
    auto s = analytic::tabulate([&](double w) { return analytic::finite_bandwidth_spectrum(w, p); },
                                97656.25, 308);
    benchmark::DoNotOptimize(s.density.data());
  }
}
BENCHMARK(BM_FiniteBandwidthTabulate)->Unit(benchmark::kMicrosecond);

static void BM_SpectrumToLgCurve(benchmark::State& state) {
  const auto p = analytic::FiniteBandwidthParams::from_gamma2_at_rabi(
      units::mhz_to_rad(10.6), 1 / 200e-9, 1 / 150e-9, units::mhz_to_rad(30.3));
  const auto s = analytic::tabulate([&](double w) { return analytic::finite_bandwidth_spectrum(w, p); },
                                    97656.25, 308);
  for (auto _ : state) {
    auto c = analytic::leggett_garg_curve(analytic::correlator_from_spectrum(s));
    benchmark::DoNotOptimize(analytic::lg_max(c).f);
  }
}
BENCHMARK(BM_SpectrumToLgCurve)->Unit(benchmark::kMicrosecond);

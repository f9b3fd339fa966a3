#include <benchmark/benchmark.h>

#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/detector.hpp"
#include "lgsim/units.hpp"

namespace {

using namespace lgsim;

const double kappa = units::mhz_to_rad(30.3);

detector::AcquisitionConfig acquisition(std::size_t n) {
  detector::AcquisitionConfig cfg;
  cfg.n_records = n;
  cfg.seed = 3;
  return cfg;
}

SpectrumRecord target(const detector::AcquisitionConfig& cfg) {
  const auto p = analytic::FiniteBandwidthParams::from_gamma2_at_rabi(units::mhz_to_rad(10.6), 1 / 200e-9,
                                                                      1 / 150e-9, kappa);
  return analytic::tabulate(
      [&](double w) { return analytic::sigma_z_spectrum(w, p.omega_rabi, p.gamma1, p.gamma2_at(w)); },
      cfg.bin_hz(), cfg.record_len / 2 + 1);
}

}  // namespace

static void BM_QuantumRecordSynthesis(benchmark::State& state) {
  const auto cfg = acquisition(1000);
  auto src = detector::synthesize_quantum_trace(target(cfg), 0.01, kappa, detector::LineResponse::flat(), cfg);
  auto scratch = src->make_scratch();
  detector::RawRecord rec;
  std::size_t i = 0;
  for (auto _ : state) {
    src->generate(i++ % src->size(), rec, *scratch);
    benchmark::DoNotOptimize(rec.i.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QuantumRecordSynthesis);

static void BM_MacrospinRecordSynthesis(benchmark::State& state) {
  const auto cfg = acquisition(1000);
  auto src = detector::synthesize_macrospin_trace(units::mhz_to_rad(10.6), 1 / 150e-9, 0.01, kappa,
                                                  detector::LineResponse::flat(), cfg);
  auto scratch = src->make_scratch();
  detector::RawRecord rec;
  std::size_t i = 0;
  for (auto _ : state) {
    src->generate(i++ % src->size(), rec, *scratch);
    benchmark::DoNotOptimize(rec.i.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MacrospinRecordSynthesis);

// Synthesis plus periodogram accumulation, records per second.
static void BM_AccumulatePeriodograms(benchmark::State& state) {
  const auto cfg = acquisition(2048);
  auto src = detector::synthesize_quantum_trace(target(cfg), 0.01, kappa, detector::LineResponse::flat(), cfg);
  const detector::ParallelOptions par{static_cast<unsigned>(state.range(0)), 256};
  for (auto _ : state) {
    auto p = detector::accumulate_periodograms(*src, par);
    benchmark::DoNotOptimize(p.on.density.data());
  }
  state.SetItemsProcessed(state.iterations() * src->size());
}
BENCHMARK(BM_AccumulatePeriodograms)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

static void BM_LgAnalysis(benchmark::State& state) {
  const auto cfg = acquisition(256);
  const auto line = detector::LineResponse::flat();
  auto src = detector::synthesize_quantum_trace(target(cfg), 0.01, kappa, line, cfg);
  const auto p = detector::accumulate_periodograms(*src);
  for (auto _ : state) {
    auto a = detector::run_lg_analysis(p, line, 0.01, kappa, detector::ErrorBudget{});
    benchmark::DoNotOptimize(a.max.f);
  }
}
BENCHMARK(BM_LgAnalysis)->Unit(benchmark::kMicrosecond);

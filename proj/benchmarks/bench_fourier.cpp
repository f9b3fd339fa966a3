#include <benchmark/benchmark.h>

#include "lgsim/fourier.hpp"
#include "lgsim/rng.hpp"

static void BM_RealFftForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  lgsim::fourier::RealFft fft(n);
  auto gen = lgsim::rng::Xoshiro256pp::stream(1, 0);
  for (auto _ : state) {
    state.PauseTiming();
    lgsim::rng::fill_normal(gen, fft.real_data());
    state.ResumeTiming();
    fft.forward();
    benchmark::DoNotOptimize(fft.spectrum_data().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RealFftForward)->Arg(1024)->Arg(4096);

static void BM_NormalDeviates(benchmark::State& state) {
  std::vector<double> buf(1024);
  auto gen = lgsim::rng::Xoshiro256pp::stream(2, 0);
  for (auto _ : state) {
    lgsim::rng::fill_normal(gen, buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_NormalDeviates);

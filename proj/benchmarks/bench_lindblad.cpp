#include <benchmark/benchmark.h>

#include "lgsim/lindblad.hpp"
#include "lgsim/units.hpp"

namespace {

using namespace lgsim;

lindblad::Generator generator(double nbar) {
  const TlsParams tls{units::hz_to_rad(5.304e9), 1 / 200e-9, 0.0, 0.0};
  const CavityParams cav{units::hz_to_rad(5.796e9), units::mhz_to_rad(30.3), units::mhz_to_rad(1.75), 0.0, 100};
  const double eps = lindblad::DriveAmplitudes::eps_for_nbar(nbar, cav.kappa);
  const lindblad::HilbertConfig hil{lindblad::HilbertConfig::recommended_fock_dim(nbar), 0.0, 0.0};
  return lindblad::build_generator(tls, cav, hil, {eps, units::mhz_to_rad(5.0)});
}

}  // namespace

static void BM_BuildGenerator(benchmark::State& state) {
  const double nbar = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(generator(nbar).liouvillian.nonZeros());
}
BENCHMARK(BM_BuildGenerator)->Arg(78)->Arg(390)->Unit(benchmark::kMillisecond);

// One nanosecond of RK4 propagation.
static void BM_Propagate1ns(benchmark::State& state) {
  const auto gen = generator(static_cast<double>(state.range(0)) / 100.0);
  lindblad::Vector v = lindblad::Vector::Zero(gen.liouvillian.rows());
  v[0] = 1.0;
  for (auto _ : state) {
    lindblad::propagate(v, gen, 1e-9);
    benchmark::DoNotOptimize(v.data());
  }
}
BENCHMARK(BM_Propagate1ns)->Arg(78)->Arg(390)->Unit(benchmark::kMicrosecond);

static void BM_SteadyState(benchmark::State& state) {
  const auto gen = generator(static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state) {
    auto rho = lindblad::steady_state(gen);
    benchmark::DoNotOptimize(rho.matrix().data());
  }
}
BENCHMARK(BM_SteadyState)->Arg(78)->Arg(390)->Unit(benchmark::kMillisecond);

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"
#include "lgsim/fourier.hpp"
#include "lgsim/rng.hpp"

using namespace lgsim;
using doctest::Approx;

TEST_CASE("real FFT round trip and tone placement") {
  const std::size_t n = 64;
  fourier::RealFft fft(n);
  auto x = fft.real_data();
  for (std::size_t i = 0; i < n; ++i) x[i] = std::cos(2 * std::numbers::pi * 5 * i / n);
  fft.forward();
  auto X = fft.spectrum_data();
  CHECK(X.size() == n / 2 + 1);
  CHECK(std::abs(X[5]) == Approx(n / 2.0));
  CHECK(std::abs(X[4]) < 1e-9);
  fft.inverse();
  CHECK(x[3] / n == Approx(std::cos(2 * std::numbers::pi * 15 / n)));
}

TEST_CASE("complex FFT sign convention") {
  fourier::ComplexFft fft(8);
  auto d = fft.data();
  for (auto& v : d) v = 0;
  d[1] = 1;
  fft.forward();
  CHECK(d[2].imag() == Approx(-std::sin(2 * std::numbers::pi * 2 / 8)));
}

TEST_CASE("cosine transform of an exponential") {
  const double g = 1e6, h = 1e-9;
  std::vector<double> k(20001);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-g * h * i);
  std::vector<double> w{0.0, 1e6, 5e6};
  auto s = fourier::cosine_transform(k, h, w);
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(s[i] == Approx(2 * g / (g * g + w[i] * w[i])).epsilon(1e-5));
}

TEST_CASE("xoshiro streams are reproducible and distinct") {
  auto a = rng::Xoshiro256pp::stream(42, 7);
  auto b = rng::Xoshiro256pp::stream(42, 7);
  auto c = rng::Xoshiro256pp::stream(42, 8);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    seen.insert(va);
    seen.insert(c());
  }
  CHECK(seen.size() == 200);
}

TEST_CASE("normal deviates have unit variance") {
  auto g = rng::Xoshiro256pp::stream(1, 0);
  std::vector<double> x(400000);
  rng::fill_normal(g, x);
  double m = 0, v = 0;
  for (double e : x) m += e;
  m /= x.size();
  for (double e : x) v += (e - m) * (e - m);
  v /= x.size() - 1;
  CHECK(std::abs(m) < 5.0 / std::sqrt(x.size()));
  CHECK(v == Approx(1.0).epsilon(0.01));
  double u = 0;
  for (int i = 0; i < 100000; ++i) u += g.uniform();
  CHECK(u / 100000 == Approx(0.5).epsilon(0.01));
}

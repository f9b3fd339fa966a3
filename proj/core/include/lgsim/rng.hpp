#pragma once

// Counter-derived random streams: every (seed, stream index) pair names an
// independent xoshiro256++ generator, so records can be synthesized in any
// order or on any thread with identical results.

#include <cstdint>
#include <limits>
#include <span>

namespace lgsim::rng {

std::uint64_t splitmix64(std::uint64_t& state);

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);
  // Generator for stream `index` of `seed`.
  static Xoshiro256pp stream(std::uint64_t seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform double in [0, 1).
  double uniform();

 private:
  std::uint64_t s_[4];
};

// Fills `out` with standard normal deviates (ziggurat).
void fill_normal(Xoshiro256pp& gen, std::span<double> out);
double normal(Xoshiro256pp& gen);

}  // namespace lgsim::rng

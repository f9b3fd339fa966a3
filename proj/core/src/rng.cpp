#include "lgsim/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace lgsim::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

Xoshiro256pp Xoshiro256pp::stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t a = seed;
  const std::uint64_t base = splitmix64(a);
  std::uint64_t b = base ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return Xoshiro256pp(splitmix64(b));
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Xoshiro256pp::result_type Xoshiro256pp::operator()() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void fill_normal(Xoshiro256pp& gen, std::span<double> out) {
  boost::random::normal_distribution<double> nd;
  for (double& v : out) v = nd(gen);
}

double normal(Xoshiro256pp& gen) {
  boost::random::normal_distribution<double> nd;
  return nd(gen);
}

}  // namespace lgsim::rng

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace aml {

// Deterministic, platform-independent random number generation. Streams are
// derived from integer keys so that independent work items (simulation
// replications, fold shuffles) never share state. Samplers are implemented
// here rather than taken from <random> because libstdc++ distribution
// output is not pinned by the standard and results must be reproducible
// bit-for-bit across toolchains.

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes a list of words into a single well-scrambled key.
inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) {
  std::uint64_t state = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) {
    state ^= splitmix64_step(state) ^ w;
    (void)splitmix64_step(state);
  }
  return splitmix64_step(state);
}

// xoshiro256++ with splitmix64 seeding.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_step(sm);
  }

  static Rng from_key(std::initializer_list<std::uint64_t> words) {
    return Rng(derive_key(words));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1]; never returns 0 so log() stays finite.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second deviate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Beta(a, b) by Johnk's rejection method; intended for small shapes
  // (here always a + b = 1).
  double beta(double a, double b) {
    for (;;) {
      const double x = std::pow(uniform(), 1.0 / a);
      const double y = std::pow(uniform(), 1.0 / b);
      const double s = x + y;
      if (s <= 1.0 && s > 0.0) return x / s;
    }
  }

  // Poisson by Knuth's product method; fine for the small means used here.
  int poisson(double lambda) {
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace aml

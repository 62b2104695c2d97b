#pragma once

#include <cstdint>
#include <random>

namespace hlsdse {

/// Seedable PRNG with portable derived draws. std::mt19937_64 has a
/// standard-pinned output sequence; the index/real mappings below avoid
/// std::uniform_*_distribution, whose outputs differ across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform integer in [0, n). Lemire multiply-shift with rejection, so
  /// the result is exactly uniform.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    while (true) {
      std::uint64_t x = gen_();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= static_cast<std::uint64_t>(-n) % n)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_real() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform_real() < p; }

  /// Derive an independent child stream; used to decorrelate samplers that
  /// share one experiment seed.
  Rng fork() { return Rng(gen_() ^ 0x9e3779b97f4a7c15ull); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hlsdse

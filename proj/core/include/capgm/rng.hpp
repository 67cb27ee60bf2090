#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace capgm {

/// One step of the SplitMix64 sequence (Steele, Lea & Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for chain `chain_index` (0-based): the (chain_index+1)-th output of
/// the SplitMix64 sequence started at `seed`. This is the documented splitting
/// rule; repeated runs with the same (seed, chain_index) are bit-identical.
inline std::uint64_t chain_seed(std::uint64_t seed, int chain_index) {
  std::uint64_t s = seed;
  std::uint64_t out = 0;
  for (int i = 0; i <= chain_index; ++i) out = splitmix64(s);
  return out;
}

/// Per-chain random stream. Value type; never shared between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_(engine_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  /// Gamma in the shape-rate convention (mean = shape/rate).
  double gamma(double shape, double rate) {
    if (shape <= 0.0 || rate <= 0.0)
      throw std::domain_error("gamma: shape and rate must be positive");
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  /// Inverse gamma with shape e and scale f: 1/X for X ~ Gamma(e, rate=f).
  double inv_gamma(double shape, double scale) {
    return 1.0 / gamma(shape, scale);
  }

  double beta(double a, double b) {
    if (a <= 0.0 || b <= 0.0)
      throw std::domain_error("beta: parameters must be positive");
    if (a == 1.0) return 1.0 - std::pow(uniform(), 1.0 / b);  // inverse CDF
    if (b == 1.0) return std::pow(uniform(), 1.0 / a);
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace capgm

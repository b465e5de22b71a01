#pragma once

#include <cstdint>
#include <random>

namespace stamp {

/// Deterministic seed mixing (splitmix64). Used to derive independent
/// per-replicate / per-draw streams from a base seed so parallel loops
/// reproduce bit-identically regardless of scheduling.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_seed(seed, stream));
  }
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Rng(mix_seed(seed, a, b));
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  double normal() {
    return std::normal_distribution<double>(0.0, 1.0)(gen_);
  }
  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(gen_);
  }
  /// Poisson draw; means beyond 1e12 are clamped (only reachable from
  /// extreme prior-predictive draws, which are off-scale anyway).
  long long poisson(double mean);
  /// N(0, sd^2) conditioned on |x| <= bound, by rejection.
  double truncated_normal(double sd, double bound);
  /// Index in [0, n) drawn from unnormalized nonnegative weights.
  std::size_t categorical(const double* weights, std::size_t n);

  std::mt19937_64& engine() { return gen_; }

private:
  std::mt19937_64 gen_;
};

} // namespace stamp

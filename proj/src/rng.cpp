#include "stamp/rng.hpp"

#include "stamp/errors.hpp"

#include <cmath>

namespace stamp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x1234abcdULL));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}

long long Rng::poisson(double mean) {
  if (!(mean >= 0.0))
    throw DomainError("poisson: mean must be nonnegative");
  if (mean > 1e12)
    mean = 1e12;
  return std::poisson_distribution<long long>(mean)(gen_);
}

double Rng::truncated_normal(double sd, double bound) {
  if (sd <= 0.0 || bound <= 0.0)
    throw DomainError("truncated_normal: sd and bound must be positive");
  for (;;) {
    double x = sd * normal();
    if (std::abs(x) <= bound)
      return x;
  }
}

std::size_t Rng::categorical(const double* weights, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    total += weights[i];
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    if (u < acc)
      return i;
  }
  return n - 1;
}

} // namespace stamp

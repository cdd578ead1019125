#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "sakf/types.hpp"

namespace sakf {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a sub-stream identified by a sequence of integer keys.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix_seed(base);
  for (auto k : keys) s = mix_seed(s ^ mix_seed(k + 0x632be59bd9b4e019ULL));
  return s;
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
class ComplexNormal {
 public:
  explicit ComplexNormal(double variance) : normal_(0.0, std::sqrt(variance / 2.0)) {}

  template <class Engine>
  cdouble operator()(Engine& rng) {
    const double re = normal_(rng);
    const double im = normal_(rng);
    return {re, im};
  }

 private:
  std::normal_distribution<double> normal_;
};

}  // namespace sakf

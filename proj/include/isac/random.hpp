#pragma once

#include <cstdint>
#include <random>

#include "isac/core.hpp"

namespace isac {

/// splitmix64 finalizer; used to turn structured seeds into decorrelated ones.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one Monte Carlo trial: base seed xor trial index, then mixed.
/// `stream` separates independent uses (bits, noise, ...) inside a trial.
constexpr std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t stream = 0) {
  return mix_seed(mix_seed(base ^ trial) ^ (stream * 0xd1b54a32d192ed03ULL));
}

/// Circularly-symmetric complex Gaussian source, CN(0, variance).
class ComplexGaussian {
 public:
  explicit ComplexGaussian(std::uint64_t seed) : engine_(seed) {}

  cplx operator()(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {s * re, s * im};
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace isac

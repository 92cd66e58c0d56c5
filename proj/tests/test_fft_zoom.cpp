#include <gtest/gtest.h>

#include <random>

#include "isac/fft.hpp"
#include "isac/zoom.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {
std::vector<cplx> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(eng), g(eng)};
  return v;
}
}  // namespace

TEST(Fft, MatchesDirectDft) {
  for (std::size_t n : {1u, 7u, 16u, 30u}) {
    auto x = noise(n, n);
    const auto ref_f = oracle::dft(x, -1), ref_i = oracle::dft(x, +1);
    auto f = x, i = x;
    fft::forward(f);
    fft::inverse(i);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_LT(std::abs(f[k] - ref_f[k]), 1e-9);
      EXPECT_LT(std::abs(i[k] - ref_i[k]), 1e-9);
    }
  }
}

TEST(Zoom, DirectIsHornerOfDefinition) {
  const auto x = noise(12, 1);
  const ZoomTransform z(12, 9, 0.013, -1);
  const auto out = z.direct(x);
  for (std::size_t k = 0; k < 9; ++k) {
    cplx ref{};
    for (std::size_t n = 0; n < 12; ++n) ref += x[n] * std::polar(1.0, -2.0 * kPi * 0.013 * static_cast<double>(k * n));
    EXPECT_LT(std::abs(out[k] - ref), 1e-10);
  }
}

TEST(Zoom, ChirpPathMatchesDirect) {
  for (int sign : {-1, +1}) {
    const auto x = noise(256, 2);
    const ZoomTransform z(256, 256, 1.0 / (256.0 * 256.0), sign);
    const auto fast = z(x), slow = z.direct(x);
    double scale = 0.0;
    for (const auto& v : slow) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < 256; ++k) EXPECT_LT(std::abs(fast[k] - slow[k]), 1e-9 * scale);
  }
}

TEST(Zoom, UnitStepEqualsDft) {
  const auto x = noise(14, 3);
  const ZoomTransform z(14, 14, 1.0 / 14.0, -1);
  const auto out = z(x);
  const auto ref = oracle::dft(x, -1);
  for (std::size_t k = 0; k < 14; ++k) EXPECT_LT(std::abs(out[k] - ref[k]), 1e-9);
}

#pragma once

// Golay complementary pairs and per-subcarrier phase coding of data grids.

#include <cstdint>
#include <optional>
#include <vector>

#include "isac/core.hpp"

namespace isac {

struct GolayPair {
  std::vector<int> a;
  std::vector<int> b;

  std::size_t length() const { return a.size(); }
};

/// Recursive doubling from the length-2 seed: (a, b) -> (a|b, a|-b).
inline GolayPair generate_golay(int k) {
  if (k < 1 || k > 16) throw ParameterError("generate_golay: k must lie in [1, 16]");
  GolayPair p{{1, 1}, {1, -1}};
  for (int step = 1; step < k; ++step) {
    const std::size_t n = p.a.size();
    std::vector<int> a(2 * n), b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = p.a[i];
      a[n + i] = p.b[i];
      b[i] = p.a[i];
      b[n + i] = -p.b[i];
    }
    p.a = std::move(a);
    p.b = std::move(b);
  }
  return p;
}

/// Aperiodic autocorrelation in exact integer arithmetic, lags -(L-1)..(L-1).
inline std::vector<std::int64_t> aperiodic_autocorrelation(const std::vector<int>& x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 0) return {};
  std::vector<std::int64_t> ac(static_cast<std::size_t>(2 * n - 1), 0);
  for (std::ptrdiff_t lag = -(n - 1); lag <= n - 1; ++lag) {
    std::int64_t acc = 0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t j = i + lag;
      if (j >= 0 && j < n) acc += static_cast<std::int64_t>(x[static_cast<std::size_t>(i)]) * x[static_cast<std::size_t>(j)];
    }
    ac[static_cast<std::size_t>(lag + n - 1)] = acc;
  }
  return ac;
}

/// Complex aperiodic autocorrelation sum_i x[i] conj(x[i+lag]), lags -(L-1)..(L-1).
inline std::vector<cplx> aperiodic_autocorrelation(std::span<const cplx> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 0) return {};
  std::vector<cplx> ac(static_cast<std::size_t>(2 * n - 1));
  for (std::ptrdiff_t lag = -(n - 1); lag <= n - 1; ++lag) {
    cplx acc{};
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, -lag); i < std::min(n, n - lag); ++i)
      acc += x[static_cast<std::size_t>(i)] * std::conj(x[static_cast<std::size_t>(i + lag)]);
    ac[static_cast<std::size_t>(lag + n - 1)] = acc;
  }
  return ac;
}

/// Phase-coded data block d'(n, m) = d(n, m) * g_n together with the chips used.
struct CodedGrid {
  CMatrix symbols;
  std::optional<std::vector<double>> chips;
};

namespace detail {
inline void require_unit_modulus(const CMatrix& m, const char* what) {
  for (const auto& v : m.data())
    if (std::abs(std::abs(v) - 1.0) > 1e-9) throw ParameterError(std::string(what) + ": entries must be unit-modulus");
}
}  // namespace detail

/// Codes a data block (rows = data subcarriers, cols = data symbols) with
/// sequence `a` of the pair, one chip per subcarrier, constant over symbols.
inline CodedGrid phase_code(const CMatrix& data, const GolayPair& pair) {
  if (pair.a.size() != data.rows())
    throw DimensionError("phase_code: chip length " + std::to_string(pair.a.size()) + " != data subcarriers " +
                         std::to_string(data.rows()));
  detail::require_unit_modulus(data, "phase_code");
  CodedGrid out{data, std::vector<double>(pair.a.begin(), pair.a.end())};
  for (std::size_t n = 0; n < data.rows(); ++n)
    for (auto& v : out.symbols.row(n)) v *= (*out.chips)[n];
  return out;
}

/// Multiplies each entry by its conjugate chip. Exact inverse of phase_code.
inline CMatrix phase_decode(const CodedGrid& coded) {
  if (!coded.chips) throw StateError("phase_decode: coded grid carries no chip reference");
  const auto& chips = *coded.chips;
  if (chips.size() != coded.symbols.rows()) throw DimensionError("phase_decode: chip/grid size mismatch");
  CMatrix out = coded.symbols;
  for (std::size_t n = 0; n < out.rows(); ++n)
    for (auto& v : out.row(n)) v *= std::conj(cplx(chips[n]));
  return out;
}

}  // namespace isac

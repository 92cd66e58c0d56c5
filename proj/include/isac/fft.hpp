#pragma once

// Thin FFTW wrapper. Plans are created once per (size, direction, rank) under
// a mutex and executed through the new-array interface, which FFTW documents
// as thread-safe. Plans carry FFTW_UNALIGNED so std::vector storage works and
// every call on a given size runs the same codelets (bit-reproducible).

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "isac/core.hpp"

namespace isac::fft {

namespace detail {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;  // (n0, n1, sign); n1 = 0 for 1-D

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n0, int n1, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(n0, n1, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    const std::size_t total = static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1 ? n1 : 1);
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = n1 == 0 ? fftw_plan_dft_1d(n0, buf, buf, sign, flags)
                             : fftw_plan_dft_2d(n0, n1, buf, buf, sign, flags);
    plans.emplace(key, plan);
    return plan;
  }
};

inline PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

inline void run_1d(std::span<cplx> x, int sign) {
  if (x.empty()) return;
  auto plan = cache().get(static_cast<int>(x.size()), 0, sign);
  auto* p = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace detail

/// In-place unnormalized forward DFT: X[k] = sum_n x[n] e^{-j2pi nk/N}.
inline void forward(std::span<cplx> x) { detail::run_1d(x, FFTW_FORWARD); }

/// In-place unnormalized inverse DFT: x[n] = sum_k X[k] e^{+j2pi nk/N}.
inline void inverse(std::span<cplx> x) { detail::run_1d(x, FFTW_BACKWARD); }

/// In-place unnormalized 2-D transform of a row-major rows x cols block.
inline void transform_2d(std::span<cplx> x, std::size_t rows, std::size_t cols, int sign) {
  if (rows * cols != x.size()) throw DimensionError("transform_2d: size mismatch");
  if (x.empty()) return;
  auto plan = detail::cache().get(static_cast<int>(rows), static_cast<int>(cols), sign);
  auto* p = reinterpret_cast<fftw_complex*>(x.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace isac::fft

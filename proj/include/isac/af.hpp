#pragma once

// Narrowband ambiguity surface and sidelobe metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "isac/core.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct AmbiguitySurface {
  RMatrix magnitudes;          // delay x doppler, peak normalized to 1
  std::vector<int> delays;     // in samples
  std::vector<double> dopplers;  // Hz
  double delay_step = 0.0;     // s
  double doppler_step = 0.0;   // Hz
};

/// Delay lags -max_lag..max_lag samples.
inline std::vector<int> delay_grid(int max_lag) {
  std::vector<int> d;
  for (int u = -max_lag; u <= max_lag; ++u) d.push_back(u);
  return d;
}

/// 2*half+1 Doppler cells centered on zero.
inline std::vector<double> doppler_grid(int half, double step) {
  std::vector<double> f;
  for (int v = -half; v <= half; ++v) f.push_back(v * step);
  return f;
}

/// Default Doppler step: 1/(2 * frame duration).
inline double default_doppler_step(const SampleStream& s) {
  return 1.0 / (2.0 * static_cast<double>(s.samples.size()) * s.t_b);
}

inline AmbiguitySurface ambiguity(std::span<const cplx> s, double t_b, const std::vector<int>& delays,
                                  const std::vector<double>& dopplers) {
  if (s.empty()) throw ParameterError("ambiguity: empty stream");
  if (delays.empty() || dopplers.empty()) throw ParameterError("ambiguity: empty grid");
  const long n = static_cast<long>(s.size());
  AmbiguitySurface out{RMatrix(delays.size(), dopplers.size()), delays, dopplers, t_b,
                       dopplers.size() > 1 ? dopplers[1] - dopplers[0] : 0.0};
  std::vector<cplx> prod(s.size());
  for (std::size_t di = 0; di < delays.size(); ++di) {
    const long u = delays[di];
    const long lo = std::max(0L, -u), hi = std::min(n, n - u);
    for (std::size_t fi = 0; fi < dopplers.size(); ++fi) {
      cplx acc{};
      const double w = 2.0 * kPi * dopplers[fi] * t_b;
      for (long i = lo; i < hi; ++i) acc += s[i] * std::conj(s[i + u]) * std::polar(1.0, w * static_cast<double>(i));
      out.magnitudes(di, fi) = std::abs(acc);
    }
  }
  double peak = 0.0;
  for (double v : out.magnitudes.data()) peak = std::max(peak, v);
  if (peak > 0.0)
    for (double& v : out.magnitudes.data()) v /= peak;
  return out;
}

inline AmbiguitySurface ambiguity(const SampleStream& s, const std::vector<int>& delays,
                                  const std::vector<double>& dopplers) {
  return ambiguity(s.samples, s.t_b, delays, dopplers);
}

struct SidelobeMetrics {
  double peak_sidelobe_db = 0.0;  // whole surface, 3x3 mainlobe excluded
  double cut_sidelobe_db = 0.0;   // zero-Doppler cut, +-1 lag excluded
  double decay_slope = 0.0;       // per second, linear magnitude of the zero-Doppler cut vs |delay|
};

inline constexpr double kNoSidelobe = -std::numeric_limits<double>::infinity();

namespace detail {
inline double to_db20(double v) { return v > 0.0 ? 20.0 * std::log10(v) : kNoSidelobe; }

inline std::size_t zero_doppler_index(const AmbiguitySurface& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.dopplers.size(); ++i)
    if (std::abs(s.dopplers[i]) < std::abs(s.dopplers[best])) best = i;
  return best;
}
}  // namespace detail

inline SidelobeMetrics sidelobe_metrics(const AmbiguitySurface& s) {
  const auto& m = s.magnitudes;
  std::size_t pr = 0, pc = 0;
  double peak = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m(r, c) > peak) { peak = m(r, c); pr = r; pc = c; }
  if (!(peak > 0.0)) throw DegenerateInputError("sidelobe_metrics: all-zero surface");

  SidelobeMetrics out;
  double side = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const bool main = (r + 1 >= pr && r <= pr + 1) && (c + 1 >= pc && c <= pc + 1);
      if (!main) side = std::max(side, m(r, c));
    }
  out.peak_sidelobe_db = detail::to_db20(side / peak);

  const std::size_t zc = detail::zero_doppler_index(s);
  double cut_peak = 0.0, cut_side = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (s.delays[r] == 0) cut_peak = m(r, zc);
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (std::abs(s.delays[r]) > 1) cut_side = std::max(cut_side, m(r, zc));
  out.cut_sidelobe_db = cut_peak > 0.0 ? detail::to_db20(cut_side / cut_peak) : kNoSidelobe;

  // least squares of magnitude against |delay|
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double x = std::abs(s.delays[r]) * s.delay_step, y = m(r, zc);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  out.decay_slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  return out;
}

/// CSV rows delay_s,doppler_hz,magnitude; magnitudes below the dB floor are clamped to it.
inline void write_surface_csv(std::ostream& os, const AmbiguitySurface& s, double floor_db = -60.0) {
  const double floor_lin = std::pow(10.0, floor_db / 20.0);
  os << "delay_s,doppler_hz,magnitude\n";
  os.precision(12);
  for (std::size_t r = 0; r < s.delays.size(); ++r)
    for (std::size_t c = 0; c < s.dopplers.size(); ++c)
      os << s.delays[r] * s.delay_step << ',' << s.dopplers[c] << ','
         << std::max(s.magnitudes(r, c), floor_lin) << '\n';
}

}  // namespace isac

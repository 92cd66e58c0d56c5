#pragma once

// Short-range sensing: channel information matrix, plain 2-D FFT estimation
// and iterative zoom refinement of range and velocity.

#include <algorithm>
#include <cmath>
#include <vector>

#include "isac/core.hpp"
#include "isac/fft.hpp"
#include "isac/waveform.hpp"
#include "isac/zoom.hpp"

namespace isac {

/// Y(n, m) = rx(n, m) / tx(n, m) on active cells, zero elsewhere.
struct ChannelInfoMatrix {
  CMatrix y;
  GridLayout layout;
  WaveformConfig cfg;

  /// Subcarriers used for coarse range: the pilot band, or the data band for pilot-free frames.
  std::size_t range_band() const { return layout.m_pilot > 0 ? layout.n_pilot : layout.n_data; }
  /// Length of the column vector used for range refinement (data band when present).
  std::size_t refine_band() const { return layout.m_data > 0 ? layout.n_data : layout.n_pilot; }
  std::size_t refine_column(std::size_t j) const { return layout.m_data > 0 ? layout.m_pilot + j : j; }
  std::size_t refine_columns() const { return layout.m_data > 0 ? layout.m_data : layout.m_pilot; }
  /// Rows active in every symbol (usable for velocity).
  std::size_t full_rows() const {
    std::size_t r = y.rows();
    if (layout.m_pilot > 0) r = std::min(r, layout.n_pilot);
    if (layout.m_data > 0) r = std::min(r, layout.n_data);
    return r;
  }
  std::size_t n_symbols() const { return y.cols(); }
};

inline ChannelInfoMatrix build_y(const SymbolGrid& tx, const SymbolGrid& rx, const WaveformConfig& cfg) {
  if (tx.cells.rows() != rx.cells.rows() || tx.cells.cols() != rx.cells.cols())
    throw DimensionError("build_y: transmitted and received grids differ in shape");
  ChannelInfoMatrix out{CMatrix(tx.cells.rows(), tx.cells.cols()), tx.layout, cfg};
  for (std::size_t n = 0; n < tx.cells.rows(); ++n)
    for (std::size_t m = 0; m < tx.cells.cols(); ++m) {
      if (tx.layout.kind(n, m) == CellKind::Inactive) continue;
      const cplx t = tx.cells(n, m);
      if (t == cplx{}) throw DegenerateInputError("build_y: zero transmitted symbol on an active cell");
      out.y(n, m) = rx.cells(n, m) / t;
    }
  return out;
}

struct TargetEstimate {
  double range = 0.0;
  double velocity = 0.0;
  std::vector<std::size_t> range_peaks;     // k_1 .. k_X
  std::vector<std::size_t> velocity_peaks;  // l_1 .. l_X
};

struct SensingEstimate {
  std::vector<TargetEstimate> targets;
  int iterations = 1;
  double range_bin = 0.0;     // accuracy after the final iteration (m)
  double velocity_bin = 0.0;  // (m/s)
};

struct RefineOptions {
  std::size_t column = 0;  // designated data column (offset into the data symbols)
  std::size_t row = 0;     // designated row for velocity
  bool average = false;    // non-coherently average zoom spectra over all columns / rows
};

struct PeakIndex {
  std::size_t k = 0;
  std::size_t l = 0;
};

namespace rd {

/// Doppler bins above M/2 are negative frequencies.
inline double signed_bin(std::size_t l, std::size_t m) {
  return 2 * l <= m ? static_cast<double>(l) : static_cast<double>(l) - static_cast<double>(m);
}

/// |2-D transform| of rows [0, rows) of Y: inverse DFT along subcarriers,
/// forward DFT along symbols. Result is rows x M, indexed (k, l).
inline RMatrix range_doppler_map(const CMatrix& y, std::size_t rows) {
  const std::size_t cols = y.cols();
  std::vector<cplx> block(y.data().begin(), y.data().begin() + static_cast<std::ptrdiff_t>(rows * cols));
  fft::transform_2d(block, rows, cols, FFTW_FORWARD);
  RMatrix map(rows, cols);
  // forward transform along n evaluated at -k equals the inverse transform at k
  for (std::size_t k = 0; k < rows; ++k) {
    const std::size_t src = (rows - k) % rows;
    for (std::size_t l = 0; l < cols; ++l) map(k, l) = std::abs(block[src * cols + l]);
  }
  return map;
}

/// Global argmax, then greedy next maxima excluding cells within one bin
/// (cyclically, both axes) of any accepted peak.
inline std::vector<PeakIndex> pick_peaks(const RMatrix& map, std::size_t count) {
  const std::size_t rows = map.rows(), cols = map.cols();
  auto near = [&](std::size_t a, std::size_t b, std::size_t len) {
    const std::size_t d = a > b ? a - b : b - a;
    return std::min(d, len - d) <= 1;
  };
  std::vector<PeakIndex> peaks;
  while (peaks.size() < count) {
    bool found = false;
    PeakIndex best{};
    double best_val = -1.0;
    for (std::size_t k = 0; k < rows; ++k)
      for (std::size_t l = 0; l < cols; ++l) {
        const bool excluded = std::any_of(peaks.begin(), peaks.end(), [&](const PeakIndex& p) {
          return near(p.k, k, rows) && near(p.l, l, cols);
        });
        if (!excluded && map(k, l) > best_val) {
          best_val = map(k, l);
          best = {k, l};
          found = true;
        }
      }
    if (!found) throw ParameterError("requested more targets than resolvable bins");
    peaks.push_back(best);
  }
  return peaks;
}

/// x[n] <- x[n] e^{+j2pi n df tau}: removes an estimated delay ramp.
inline void compensate_delay(std::span<cplx> x, double delta_f, double tau) {
  for (std::size_t n = 0; n < x.size(); ++n) x[n] *= std::polar(1.0, 2.0 * kPi * static_cast<double>(n) * delta_f * tau);
}

/// x[m] <- x[m] e^{-j2pi m T_sym f_d}: removes an estimated Doppler ramp.
inline void compensate_doppler(std::span<cplx> x, double t_sym, double f_d) {
  for (std::size_t m = 0; m < x.size(); ++m) x[m] *= std::polar(1.0, -2.0 * kPi * static_cast<double>(m) * t_sym * f_d);
}

/// Removes every coarse peak except `keep` from the rows x M block of Y by
/// zeroing their +-1 bin neighbourhoods in the 2-D spectrum. Peaks within two
/// coarse bins of `keep` on both axes are treated as part of its response and
/// left alone.
inline CMatrix isolate_peak(const ChannelInfoMatrix& ch, const std::vector<PeakIndex>& peaks, std::size_t keep) {
  CMatrix out = ch.y;
  const std::size_t rows = ch.full_rows(), cols = ch.n_symbols(), band = ch.range_band();
  if (rows == 0 || peaks.size() < 2) return out;
  std::vector<cplx> block(out.data().begin(), out.data().begin() + static_cast<std::ptrdiff_t>(rows * cols));
  fft::transform_2d(block, rows, cols, FFTW_FORWARD);

  const double ratio = static_cast<double>(rows) / static_cast<double>(band);
  const auto half = static_cast<std::ptrdiff_t>(std::max(1.0, std::ceil(ratio)));
  auto to_block = [&](std::size_t k) { return static_cast<std::ptrdiff_t>(std::llround(static_cast<double>(k) * ratio)); };
  auto wrap = [](std::ptrdiff_t v, std::size_t len) {
    const auto n = static_cast<std::ptrdiff_t>(len);
    return static_cast<std::size_t>(((v % n) + n) % n);
  };
  const auto own_k = to_block(peaks[keep].k);
  const auto own_l = static_cast<std::ptrdiff_t>(peaks[keep].l);
  for (std::size_t p = 0; p < peaks.size(); ++p) {
    if (p == keep) continue;
    const auto pk = to_block(peaks[p].k);
    const auto pl = static_cast<std::ptrdiff_t>(peaks[p].l);
    const auto sep_k = std::min(wrap(pk - own_k, rows), wrap(own_k - pk, rows));
    const auto sep_l = std::min(wrap(pl - own_l, cols), wrap(own_l - pl, cols));
    if (sep_k <= static_cast<std::size_t>(2 * half) && sep_l <= 2) continue;
    for (std::ptrdiff_t dk = -half; dk <= half; ++dk)
      for (std::ptrdiff_t dl = -1; dl <= 1; ++dl) {
        const std::size_t k = wrap(pk + dk, rows), l = wrap(pl + dl, cols);
        const auto own_dk = std::min(wrap(static_cast<std::ptrdiff_t>(k) - own_k, rows), wrap(own_k - static_cast<std::ptrdiff_t>(k), rows));
        const auto own_dl = std::min(wrap(static_cast<std::ptrdiff_t>(l) - own_l, cols), wrap(own_l - static_cast<std::ptrdiff_t>(l), cols));
        if (own_dk <= 1 && own_dl <= 1) continue;
        block[((rows - k) % rows) * cols + l] = cplx{};  // map index (k, l) lives at forward bin -k
      }
  }
  fft::transform_2d(block, rows, cols, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(rows * cols);
  for (std::size_t i = 0; i < rows * cols; ++i) out.data()[i] = block[i] * scale;
  return out;
}

inline void check_zoom_depth(std::size_t len, int iterations, const char* axis) {
  // the finest zoom bin relative to the coarse bin is len^-(iterations-1)
  const double depth = static_cast<double>(iterations - 1) * std::log10(static_cast<double>(std::max<std::size_t>(len, 2)));
  if (depth > 15.0)
    throw NumericLimitError(std::string("iterative refinement: ") + axis +
                            " zoom bin falls below 1e-15 of the coarse bin");
}

}  // namespace rd

/// Plain 2-D FFT estimate: R = c k / (2 N_p df), V = c l / (2 f_c T_sym M).
inline SensingEstimate estimate_2dfft(const ChannelInfoMatrix& ch, std::size_t n_targets) {
  if (n_targets < 1) throw ParameterError("estimate_2dfft: n_targets must be >= 1");
  const std::size_t band = ch.range_band(), cols = ch.n_symbols();
  if (band == 0 || cols == 0) throw DimensionError("estimate_2dfft: empty channel matrix");
  if (n_targets > band * cols) throw ParameterError("estimate_2dfft: more targets than range-Doppler bins");
  const auto map = rd::range_doppler_map(ch.y, band);
  const auto peaks = rd::pick_peaks(map, n_targets);

  const double range_bin = kSpeedOfLight / (2.0 * static_cast<double>(band) * ch.cfg.delta_f);
  const double vel_bin = kSpeedOfLight / (2.0 * ch.cfg.f_c * ch.cfg.symbol_duration() * static_cast<double>(cols));
  SensingEstimate est{{}, 1, range_bin, vel_bin};
  for (const auto& p : peaks)
    est.targets.push_back({range_bin * static_cast<double>(p.k), vel_bin * rd::signed_bin(p.l, cols), {p.k}, {p.l}});
  return est;
}

/// Iterative 2-D FFT: coarse peaks from the plain method, then X-1 zoom
/// refinements on a phase-compensated data column (range) and row (velocity).
/// Non-final iterations back off by half a bin so the next zoom window
/// [0, 1) bin brackets the residual.
inline SensingEstimate estimate_iterative_2dfft(const ChannelInfoMatrix& ch, int iterations, std::size_t n_targets,
                                                const RefineOptions& opt = {}) {
  if (iterations < 1) throw ParameterError("estimate_iterative_2dfft: X must be >= 1");
  if (iterations == 1) return estimate_2dfft(ch, n_targets);

  const std::size_t band = ch.range_band(), len_r = ch.refine_band(), cols = ch.n_symbols();
  rd::check_zoom_depth(len_r, iterations, "range");
  rd::check_zoom_depth(cols, iterations, "velocity");
  if (opt.column >= ch.refine_columns()) throw ParameterError("estimate_iterative_2dfft: designated column out of range");
  if (opt.row >= ch.full_rows()) throw ParameterError("estimate_iterative_2dfft: designated row out of range");

  const auto coarse = estimate_2dfft(ch, n_targets);
  std::vector<PeakIndex> peaks;
  for (const auto& t : coarse.targets) peaks.push_back({t.range_peaks[0], t.velocity_peaks[0]});

  const double df = ch.cfg.delta_f, tsym = ch.cfg.symbol_duration();
  const auto x_total = static_cast<std::size_t>(iterations);

  // zoom transforms depend only on the iteration index
  std::vector<ZoomTransform> range_zoom, vel_zoom;
  for (std::size_t i = 2; i <= x_total; ++i) {
    range_zoom.emplace_back(len_r, len_r,
                            1.0 / (static_cast<double>(band) * std::pow(static_cast<double>(len_r), static_cast<double>(i - 1))), +1);
    vel_zoom.emplace_back(cols, cols, 1.0 / std::pow(static_cast<double>(cols), static_cast<double>(i)), -1);
  }

  SensingEstimate est{{}, iterations, 0.0, 0.0};
  est.range_bin = kSpeedOfLight / (2.0 * df) / (static_cast<double>(band) * std::pow(static_cast<double>(len_r), iterations - 1));
  est.velocity_bin = kSpeedOfLight / (2.0 * ch.cfg.f_c * tsym * std::pow(static_cast<double>(cols), iterations));

  for (std::size_t t = 0; t < peaks.size(); ++t) {
    const CMatrix y = rd::isolate_peak(ch, peaks, t);
    TargetEstimate te;
    te.range_peaks = {peaks[t].k};
    te.velocity_peaks = {peaks[t].l};

    // iteration 1 with half-bin back-off
    double tau = (static_cast<double>(peaks[t].k) - 0.5) / (df * static_cast<double>(band));
    double fd = (rd::signed_bin(peaks[t].l, cols) - 0.5) / (tsym * static_cast<double>(cols));

    std::vector<std::size_t> col_ids, row_ids;
    if (opt.average) {
      for (std::size_t j = 0; j < ch.refine_columns(); ++j) col_ids.push_back(ch.refine_column(j));
      for (std::size_t r = 0; r < ch.full_rows(); ++r) row_ids.push_back(r);
    } else {
      col_ids = {ch.refine_column(opt.column)};
      row_ids = {opt.row};
    }

    for (std::size_t i = 2; i <= x_total; ++i) {
      const bool last = i == x_total;
      const double offset = last ? 0.0 : 0.5;

      std::vector<double> spec_r(len_r, 0.0);
      std::vector<cplx> vec(len_r);
      for (auto c : col_ids) {
        for (std::size_t n = 0; n < len_r; ++n) vec[n] = y(n, c);
        rd::compensate_delay(vec, df, tau);
        const auto z = range_zoom[i - 2](vec);
        for (std::size_t q = 0; q < len_r; ++q) spec_r[q] += std::abs(z[q]);
      }
      const std::size_t k = argmax<double>(spec_r);
      tau += (static_cast<double>(k) - offset) /
             (df * static_cast<double>(band) * std::pow(static_cast<double>(len_r), static_cast<double>(i - 1)));

      std::vector<double> spec_v(cols, 0.0);
      std::vector<cplx> rowv(cols);
      for (auto r : row_ids) {
        std::copy(y.row(r).begin(), y.row(r).end(), rowv.begin());
        rd::compensate_doppler(rowv, tsym, fd);
        const auto z = vel_zoom[i - 2](rowv);
        for (std::size_t q = 0; q < cols; ++q) spec_v[q] += std::abs(z[q]);
      }
      const std::size_t l = argmax<double>(spec_v);
      fd += (static_cast<double>(l) - offset) / (tsym * std::pow(static_cast<double>(cols), static_cast<double>(i)));

      te.range_peaks.push_back(k);
      te.velocity_peaks.push_back(l);
    }
    te.range = kSpeedOfLight / 2.0 * tau;
    te.velocity = kSpeedOfLight / (2.0 * ch.cfg.f_c) * fd;
    est.targets.push_back(std::move(te));
  }
  return est;
}

}  // namespace isac

#pragma once

// Long-range sensing: grouping with a virtual cyclic prefix (VCP), cyclic
// cross-correlation range search, ML-reduced Doppler DFT and iterative
// zoom refinement of the Doppler estimate.

#include <algorithm>
#include <cmath>
#include <vector>

#include "isac/core.hpp"
#include "isac/fft.hpp"
#include "isac/rd_short.hpp"
#include "isac/waveform.hpp"
#include "isac/zoom.hpp"

namespace isac {

/// Where the VCP overlap-add takes its samples from.
///  - GroupTail: the last Q samples of the same group (group[i] += group[N-Q+i]).
///  - FollowingSamples: the Q received samples that follow the group, i.e. the
///    part of this group's echo that spilled into the next window.
enum class VcpSource { GroupTail, FollowingSamples };

struct GroupedSamples {
  CMatrix groups;  // M~ x N~
  std::size_t vcp_len = 0;
  double t_b = 0.0;
  double f_c = 0.0;

  std::size_t n_groups() const { return groups.rows(); }
  std::size_t group_len() const { return groups.cols(); }
};

struct GroupingParams {
  std::size_t group_len = 128;   // N~
  std::size_t vcp_len = 0;       // Q~
  std::size_t max_groups = 0;    // M~ cap; 0 = every whole group
  VcpSource source = VcpSource::GroupTail;
};

/// Partitions CP-free transmit and receive samples into whole groups; the
/// VCP overlap-add is applied to the receive groups only.
inline std::pair<GroupedSamples, GroupedSamples> group_with_vcp(std::span<const cplx> tx, std::span<const cplx> rx,
                                                                double t_b, double f_c, const GroupingParams& p) {
  const std::size_t n = p.group_len, q = p.vcp_len;
  if (n == 0 || n <= q) throw ParameterError("group_with_vcp: need N~ > Q~ >= 0");
  std::size_t groups = std::min(tx.size(), rx.size()) / n;
  if (p.max_groups > 0) groups = std::min(groups, p.max_groups);
  if (groups == 0) throw ParameterError("group_with_vcp: stream shorter than one group");

  GroupedSamples gt{CMatrix(groups, n), 0, t_b, f_c};
  GroupedSamples gr{CMatrix(groups, n), q, t_b, f_c};
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      gt.groups(g, i) = tx[g * n + i];
      gr.groups(g, i) = rx[g * n + i];
    }
    for (std::size_t i = 0; i < q; ++i) {
      if (p.source == VcpSource::GroupTail) {
        gr.groups(g, i) += rx[g * n + n - q + i];
      } else if (const std::size_t j = (g + 1) * n + i; j < rx.size()) {
        gr.groups(g, i) += rx[j];
      }
    }
  }
  return {std::move(gt), std::move(gr)};
}

/// Convenience overload: strips the CP from both streams first.
inline std::pair<GroupedSamples, GroupedSamples> group_with_vcp(const SampleStream& tx, const SampleStream& rx,
                                                                const WaveformConfig& cfg, const GroupingParams& p) {
  const auto txs = strip_cp(tx, cfg);
  const auto rxs = strip_cp(rx, cfg);
  return group_with_vcp(txs, rxs, cfg.sample_interval(), cfg.f_c, p);
}

/// Per-group cyclic cross-correlation rho_m(p) and its non-coherent aggregate.
struct CorrProfile {
  CMatrix values;                // M~ x N~, values(m, p)
  std::vector<double> aggregate; // sum_m |rho_m(p)|
  std::size_t peak = 0;
  double t_b = 0.0;
  double f_c = 0.0;
};

struct CcRange {
  std::size_t p0 = 0;
  double range = 0.0;
  CorrProfile profile;
};

/// rho_m(p) = sum_i r_m[i] conj(s_m[(i - p) mod N~]), evaluated through
/// R(k) conj(S(k)). Every group is reduced in index order.
inline CorrProfile correlate_groups(const GroupedSamples& tx, const GroupedSamples& rx) {
  if (tx.groups.rows() != rx.groups.rows() || tx.groups.cols() != rx.groups.cols())
    throw DimensionError("cc_range: transmit and receive groups differ in shape");
  const std::size_t groups = tx.n_groups(), n = tx.group_len();
  CorrProfile prof{CMatrix(groups, n), std::vector<double>(n, 0.0), 0, tx.t_b, tx.f_c};
  std::vector<cplx> s(n), r(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto srow = tx.groups.row(g);
    if (std::all_of(srow.begin(), srow.end(), [](const cplx& v) { return v == cplx{}; }))
      throw DegenerateInputError("cc_range: all-zero transmit group " + std::to_string(g));
    std::copy(srow.begin(), srow.end(), s.begin());
    std::copy(rx.groups.row(g).begin(), rx.groups.row(g).end(), r.begin());
    fft::forward(s);
    fft::forward(r);
    for (std::size_t k = 0; k < n; ++k) r[k] *= std::conj(s[k]);
    fft::inverse(r);
    for (std::size_t p = 0; p < n; ++p) {
      prof.values(g, p) = r[p] * scale;
      prof.aggregate[p] += std::abs(prof.values(g, p));
    }
  }
  prof.peak = argmax<double>(prof.aggregate);
  return prof;
}

inline double cc_range_bin(double t_b) { return kSpeedOfLight * t_b / 2.0; }

inline CcRange cc_range(const GroupedSamples& tx, const GroupedSamples& rx) {
  auto prof = correlate_groups(tx, rx);
  const std::size_t p0 = prof.peak;
  return {p0, cc_range_bin(tx.t_b) * static_cast<double>(p0), std::move(prof)};
}

/// Largest aggregate lags, each excluding its cyclic +-1 neighbours.
inline std::vector<std::size_t> cc_range_peaks(const CorrProfile& prof, std::size_t count) {
  const std::size_t n = prof.aggregate.size();
  std::vector<std::size_t> peaks;
  while (peaks.size() < count) {
    std::ptrdiff_t best = -1;
    for (std::size_t p = 0; p < n; ++p) {
      const bool excluded = std::any_of(peaks.begin(), peaks.end(), [&](std::size_t q) {
        const std::size_t d = p > q ? p - q : q - p;
        return std::min(d, n - d) <= 1;
      });
      if (!excluded && (best < 0 || prof.aggregate[p] > prof.aggregate[static_cast<std::size_t>(best)]))
        best = static_cast<std::ptrdiff_t>(p);
    }
    if (best < 0) throw ParameterError("cc_range: requested more targets than resolvable lags");
    peaks.push_back(static_cast<std::size_t>(best));
  }
  return peaks;
}

struct CcVelocity {
  std::vector<std::size_t> peaks;  // l_0 .. l_{X-1}
  double nu = 0.0;                 // normalised Doppler f_d T_b
  double velocity = 0.0;
  double velocity_bin = 0.0;
};

/// Velocity accuracy c / (2 f_c N~ T_b M~^X).
inline double cc_velocity_bin(double f_c, double t_b, std::size_t group_len, std::size_t groups, int iterations = 1) {
  return kSpeedOfLight /
         (2.0 * f_c * static_cast<double>(group_len) * t_b * std::pow(static_cast<double>(groups), iterations));
}

/// Doppler vector a(m) = rho_m(p0) across groups.
inline std::vector<cplx> doppler_vector(const CorrProfile& prof, std::size_t p0) {
  if (p0 >= prof.values.cols()) throw ParameterError("cc_velocity: lag outside the profile");
  return prof.values.col(p0);
}

/// Iterative CC velocity: l_0 from the M~-point DFT of a, then X-1 zoom DFTs
/// of the phase-compensated vector at spacing 1/M~^{x+1} cycles per group.
inline CcVelocity cc_velocity_iterative(const CorrProfile& prof, std::size_t p0, int iterations) {
  if (iterations < 1) throw ParameterError("cc_velocity: X must be >= 1");
  const std::size_t groups = prof.values.rows(), n = prof.values.cols();
  if (groups < 2) throw ParameterError("cc_velocity: need at least two groups");
  rd::check_zoom_depth(groups, iterations, "velocity");

  const auto a = doppler_vector(prof, p0);
  std::vector<cplx> spec = a;
  fft::forward(spec);
  std::vector<double> mag(groups);
  for (std::size_t l = 0; l < groups; ++l) mag[l] = std::abs(spec[l]);

  CcVelocity out;
  const std::size_t l0 = argmax<double>(mag);
  out.peaks.push_back(l0);
  const double mn = static_cast<double>(groups) * static_cast<double>(n);
  double nu = (rd::signed_bin(l0, groups) - (iterations > 1 ? 0.5 : 0.0)) / mn;

  std::vector<cplx> comp(groups);
  for (int x = 1; x < iterations; ++x) {
    const double step = 1.0 / std::pow(static_cast<double>(groups), x + 1);  // cycles per group
    for (std::size_t g = 0; g < groups; ++g)
      comp[g] = a[g] * std::polar(1.0, -2.0 * kPi * nu * static_cast<double>(g) * static_cast<double>(n));
    const auto z = ZoomTransform(groups, groups, step, -1)(comp);
    for (std::size_t l = 0; l < groups; ++l) mag[l] = std::abs(z[l]);
    const std::size_t lx = argmax<double>(mag);
    out.peaks.push_back(lx);
    const double offset = x == iterations - 1 ? 0.0 : 0.5;
    nu += (static_cast<double>(lx) - offset) * step / static_cast<double>(n);
  }
  out.nu = nu;
  out.velocity = kSpeedOfLight * nu / (2.0 * prof.f_c * prof.t_b);
  out.velocity_bin = cc_velocity_bin(prof.f_c, prof.t_b, n, groups, iterations);
  return out;
}

/// Plain CC velocity: V = c l0 / (2 f_c T_b M~ N~).
inline CcVelocity cc_velocity(const CorrProfile& prof, std::size_t p0) { return cc_velocity_iterative(prof, p0, 1); }

/// Full long-range estimate: n_targets correlation peaks, each with its own
/// (optionally iterative) velocity search.
inline SensingEstimate estimate_cc(const GroupedSamples& tx, const GroupedSamples& rx, std::size_t n_targets,
                                   int iterations = 1) {
  if (n_targets < 1) throw ParameterError("estimate_cc: n_targets must be >= 1");
  const auto prof = correlate_groups(tx, rx);
  const auto lags = cc_range_peaks(prof, n_targets);
  SensingEstimate est{{}, iterations, cc_range_bin(tx.t_b),
                      cc_velocity_bin(tx.f_c, tx.t_b, tx.group_len(), tx.n_groups(), iterations)};
  for (auto p : lags) {
    const auto v = cc_velocity_iterative(prof, p, iterations);
    est.targets.push_back({cc_range_bin(tx.t_b) * static_cast<double>(p), v.velocity, {p}, v.peaks});
  }
  return est;
}

}  // namespace isac

#pragma once

// Multi-target echo simulation: a symbol-domain fast path valid while every
// delay stays inside the CP, and a sample-domain path for arbitrary delays.

#include <cstdint>
#include <optional>
#include <vector>

#include "isac/core.hpp"
#include "isac/random.hpp"
#include "isac/waveform.hpp"

namespace isac {

struct Target {
  double range = 0.0;     // m
  double velocity = 0.0;  // m/s, positive = approaching (positive Doppler)
  cplx gain{1.0, 0.0};    // attenuation x RCS coefficient

  double delay() const { return 2.0 * range / kSpeedOfLight; }
  double doppler(double f_c) const { return 2.0 * velocity * f_c / kSpeedOfLight; }
};

/// SNR of the received echo, defined per cell (symbol domain) or per sample
/// (sample domain) against the measured noiseless echo power.
struct NoiseSpec {
  std::optional<double> snr_db;  // nullopt: noiseless
  std::uint64_t seed = 0;
};

namespace detail {
inline void validate_targets(const std::vector<Target>& targets) {
  for (const auto& t : targets)
    if (!(t.range >= 0.0)) throw ParameterError("target range must be non-negative");
}
}  // namespace detail

/// Re(n, m) = sum_t h_t d(n, m) e^{-j2pi n df tau_t} e^{j2pi m T_sym f_d,t} + w(n, m).
inline SymbolGrid echo_symbol_domain(const SymbolGrid& grid, const WaveformConfig& cfg,
                                     const std::vector<Target>& targets, const NoiseSpec& noise) {
  detail::validate_targets(targets);
  if (grid.n_sub() != cfg.n_sub || grid.n_symbols() != cfg.n_symbols())
    throw DimensionError("echo_symbol_domain: grid does not match configuration");
  const double cp = cfg.cp_duration();
  for (const auto& t : targets)
    if (t.delay() > 0.0 && t.delay() >= cp)
      throw ModelViolationError("echo_symbol_domain: target at " + std::to_string(t.range) +
                                " m is delayed beyond the CP; use echo_sample_domain");

  SymbolGrid out = grid;
  std::fill(out.cells.data().begin(), out.cells.data().end(), cplx{});
  const std::size_t rows = grid.n_sub(), cols = grid.n_symbols();
  std::vector<cplx> ramp_n(rows), ramp_m(cols);
  for (const auto& t : targets) {
    const double tau = t.delay(), fd = t.doppler(cfg.f_c), tsym = cfg.symbol_duration();
    for (std::size_t n = 0; n < rows; ++n)
      ramp_n[n] = t.gain * std::polar(1.0, -2.0 * kPi * static_cast<double>(n) * cfg.delta_f * tau);
    for (std::size_t m = 0; m < cols; ++m) ramp_m[m] = std::polar(1.0, 2.0 * kPi * static_cast<double>(m) * tsym * fd);
    for (std::size_t n = 0; n < rows; ++n)
      for (std::size_t m = 0; m < cols; ++m) out.cells(n, m) += grid.cells(n, m) * ramp_n[n] * ramp_m[m];
  }

  if (noise.snr_db) {
    double power = 0.0;
    std::size_t active = 0;
    for (std::size_t n = 0; n < rows; ++n)
      for (std::size_t m = 0; m < cols; ++m)
        if (grid.layout.kind(n, m) != CellKind::Inactive) {
          power += std::norm(out.cells(n, m));
          ++active;
        }
    if (active == 0) throw DegenerateInputError("echo_symbol_domain: no active cells");
    const double variance = power / static_cast<double>(active) / from_db10(*noise.snr_db);
    ComplexGaussian gen(noise.seed);
    for (auto& v : out.cells.data()) v += gen(variance);
  }
  return out;
}

enum class DelayInterpolation { Nearest, BandLimited };

namespace detail {
// Hann-windowed sinc interpolation of s at fractional position x.
inline cplx interpolate(std::span<const cplx> s, double x) {
  constexpr int kHalf = 16;
  const auto base = static_cast<std::ptrdiff_t>(std::floor(x));
  cplx acc{};
  for (std::ptrdiff_t k = base - kHalf + 1; k <= base + kHalf; ++k) {
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(s.size())) continue;
    const double u = x - static_cast<double>(k);
    const double sinc = u == 0.0 ? 1.0 : std::sin(kPi * u) / (kPi * u);
    const double w = 0.5 * (1.0 + std::cos(kPi * u / kHalf));
    acc += s[static_cast<std::size_t>(k)] * (sinc * w);
  }
  return acc;
}
}  // namespace detail

/// r[i] = sum_t h_t s(i - tau_t/T_b) e^{j2pi f_d,t (t0 + i T_b)} + w[i]. The
/// output keeps the input length; samples pushed past the end are dropped.
inline SampleStream echo_sample_domain(const SampleStream& stream, const std::vector<Target>& targets,
                                       const NoiseSpec& noise,
                                       DelayInterpolation interp = DelayInterpolation::Nearest) {
  detail::validate_targets(targets);
  if (!(stream.t_b > 0.0)) throw ParameterError("echo_sample_domain: stream has no sample interval");
  const std::size_t len = stream.samples.size();
  SampleStream out = stream;
  std::fill(out.samples.begin(), out.samples.end(), cplx{});
  for (const auto& t : targets) {
    const double shift = t.delay() / stream.t_b;
    if (shift >= static_cast<double>(len)) throw ParameterError("echo_sample_domain: delay exceeds stream length");
    const double dphi = 2.0 * kPi * t.doppler(stream.f_c) * stream.t_b;
    const double phi0 = 2.0 * kPi * t.doppler(stream.f_c) * stream.t0;
    if (interp == DelayInterpolation::Nearest) {
      const auto d = static_cast<std::size_t>(std::llround(shift));
      for (std::size_t i = d; i < len; ++i)
        out.samples[i] += t.gain * stream.samples[i - d] * std::polar(1.0, phi0 + dphi * static_cast<double>(i));
    } else {
      for (std::size_t i = 0; i < len; ++i)
        out.samples[i] += t.gain * detail::interpolate(stream.samples, static_cast<double>(i) - shift) *
                          std::polar(1.0, phi0 + dphi * static_cast<double>(i));
    }
  }
  if (noise.snr_db && len > 0) {
    const double variance = energy(out.samples) / static_cast<double>(len) / from_db10(*noise.snr_db);
    ComplexGaussian gen(noise.seed);
    for (auto& v : out.samples) v += gen(variance);
  }
  return out;
}

}  // namespace isac

#pragma once

// Log-likelihood of the grouped long-range model, its Fisher information and
// the closed-form CRLBs of delay/Doppler and range/velocity.
//
// The coherent gain L = 10 log(N~) is a dB-style quantity that the bounds use
// as a plain linear multiplier of the SNR. That is reproduced as-is.

#include <array>
#include <cmath>
#include <vector>

#include "isac/cc_long.hpp"
#include "isac/core.hpp"
#include "isac/fft.hpp"

namespace isac {

/// L for a phase-coded frame (log base configurable, default 10); 1 when uncoded.
inline double coherent_gain(std::size_t group_len, bool coded, double log_base = 10.0) {
  if (!coded) return 1.0;
  return 10.0 * std::log(static_cast<double>(group_len)) / std::log(log_base);
}

struct CrlbParams {
  cplx h{1.0, 0.0};
  double snr = 1.0;           // linear
  std::size_t group_len = 0;  // N~
  std::size_t vcp_len = 0;    // Q~
  std::size_t groups = 0;     // M~
  std::size_t n_sub = 0;      // N
  double t_b = 0.0;
  double f_c = 0.0;
  double coherent_gain = 1.0; // L
};

struct CrlbReport {
  double crlb_eps = 0.0;  // samples^2
  double crlb_ups = 0.0;  // (f_d T_b)^2
  double crlb_r = 0.0;    // m^2
  double crlb_v = 0.0;    // (m/s)^2
};

inline CrlbReport crlb(const CrlbParams& p) {
  if (p.groups < 2) throw ParameterError("crlb: velocity bound undefined for fewer than two groups");
  if (p.group_len == 0 || p.n_sub == 0) throw ParameterError("crlb: N~ and N must be positive");
  if (!(p.snr > 0.0) || !(p.coherent_gain > 0.0) || std::norm(p.h) == 0.0)
    throw ParameterError("crlb: SNR, L and |h| must be positive");
  if (!(p.t_b > 0.0) || !(p.f_c > 0.0)) throw ParameterError("crlb: T_b and f_c must be positive");
  const double eff = static_cast<double>(p.group_len) - static_cast<double>(p.vcp_len) / 3.0;
  if (!(eff > 0.0)) throw ParameterError("crlb: requires N~ > Q~/3");
  const double ratio = static_cast<double>(p.group_len) / static_cast<double>(p.n_sub);
  const double shape = 4.0 - ratio * ratio;
  if (!(shape > 0.0)) throw ParameterError("crlb: requires N~ < 2N");

  const double n = static_cast<double>(p.n_sub), mg = static_cast<double>(p.groups);
  const double common = kPi * kPi * std::norm(p.h) * p.coherent_gain * p.snr * eff * n;
  const double c = kSpeedOfLight;
  CrlbReport r;
  r.crlb_eps = 6.0 / (common * shape);
  r.crlb_ups = 4.0 / (3.0 * common * mg * (mg - 1.0));
  r.crlb_r = 3.0 * p.t_b * p.t_b * c * c / (2.0 * common * shape);
  r.crlb_v = c * c / (3.0 * common * p.t_b * p.t_b * p.f_c * p.f_c * mg * (mg - 1.0));
  return r;
}

struct DelayDoppler {
  double eps = 0.0;  // tau / T_b (samples, may be fractional)
  double ups = 0.0;  // f_d T_b
};

struct LikelihoodParams {
  cplx h{1.0, 0.0};
  double sigma2 = 1.0;         // per-sample complex noise power
  double coherent_gain = 1.0;  // L
  std::size_t vcp_len = 0;     // Q~
};

namespace detail {
inline double signed_freq(std::size_t k, std::size_t n) {
  return 2 * k < n ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

/// Cyclic band-limited shift of every group by eps samples, plus the derivative
/// of the shifted group with respect to eps.
inline std::pair<CMatrix, CMatrix> shifted_groups(const CMatrix& s, double eps) {
  const std::size_t groups = s.rows(), n = s.cols();
  CMatrix shifted(groups, n), deriv(groups, n);
  std::vector<cplx> spec(n), dspec(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t g = 0; g < groups; ++g) {
    std::copy(s.row(g).begin(), s.row(g).end(), spec.begin());
    fft::forward(spec);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = 2.0 * kPi * signed_freq(k, n) / static_cast<double>(n);
      spec[k] *= std::polar(scale, -w * eps);
      dspec[k] = spec[k] * cplx(0.0, -w);
    }
    fft::inverse(spec);
    fft::inverse(dspec);
    std::copy(spec.begin(), spec.end(), shifted.row(g).begin());
    std::copy(dspec.begin(), dspec.end(), deriv.row(g).begin());
  }
  return {std::move(shifted), std::move(deriv)};
}
}  // namespace detail

/// Noiseless model s~_m[i] = h s_m[i - eps] e^{j2pi ups (m N~ + i)}.
inline CMatrix echo_model(const DelayDoppler& theta, const CMatrix& tx_groups, cplx h) {
  auto [shifted, unused] = detail::shifted_groups(tx_groups, theta.eps);
  const std::size_t n = tx_groups.cols();
  for (std::size_t g = 0; g < shifted.rows(); ++g)
    for (std::size_t i = 0; i < n; ++i)
      shifted(g, i) *= h * std::polar(1.0, 2.0 * kPi * theta.ups * static_cast<double>(g * n + i));
  return shifted;
}

/// Two-regime Gaussian log-likelihood: variance 3 sigma^2 / L on the first Q~
/// samples of each group, 2 sigma^2 / L on the rest.
inline double log_likelihood(const DelayDoppler& theta, const CMatrix& tx_groups, const CMatrix& rx_groups,
                             const LikelihoodParams& p) {
  if (!(p.sigma2 > 0.0)) throw ParameterError("log_likelihood: sigma^2 must be positive");
  if (!(p.coherent_gain > 0.0)) throw ParameterError("log_likelihood: L must be positive");
  if (tx_groups.rows() != rx_groups.rows() || tx_groups.cols() != rx_groups.cols())
    throw DimensionError("log_likelihood: group shapes differ");
  const std::size_t groups = tx_groups.rows(), n = tx_groups.cols();
  if (p.vcp_len >= n) throw ParameterError("log_likelihood: requires Q~ < N~");

  const auto model = echo_model(theta, tx_groups, p.h);
  const double var_head = 3.0 * p.sigma2 / p.coherent_gain, var_tail = 2.0 * p.sigma2 / p.coherent_gain;
  double ll = 0.0;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < n; ++i) {
      const double var = i < p.vcp_len ? var_head : var_tail;
      ll += -0.5 * std::log(2.0 * kPi * var) - std::norm(rx_groups(g, i) - model(g, i)) / (2.0 * var);
    }
  return ll;
}

/// Fisher information from the element formulas: weighted sums of products of
/// the model derivatives (weight 1/3 inside the VCP region, 1/2 outside).
inline std::array<std::array<double, 2>, 2> fisher_information(const DelayDoppler& theta, const CMatrix& tx_groups,
                                                               const LikelihoodParams& p) {
  const std::size_t groups = tx_groups.rows(), n = tx_groups.cols();
  auto [shifted, deriv] = detail::shifted_groups(tx_groups, theta.eps);
  double j11 = 0.0, j22 = 0.0, j12 = 0.0;
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(g * n + i);
      const cplx rot = p.h * std::polar(1.0, 2.0 * kPi * theta.ups * t);
      const cplx d_eps = deriv(g, i) * rot;
      const cplx d_ups = shifted(g, i) * rot * cplx(0.0, 2.0 * kPi * t);
      const double w = i < p.vcp_len ? 1.0 / 3.0 : 1.0 / 2.0;
      j11 += w * std::norm(d_eps);
      j22 += w * std::norm(d_ups);
      j12 += w * std::real(d_eps * std::conj(d_ups));
    }
  const double s = p.coherent_gain / p.sigma2;
  return {{{s * j11, s * j12}, {s * j12, s * j22}}};
}

}  // namespace isac

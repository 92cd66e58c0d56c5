#pragma once

// Zoom transform: evaluates sum_n x[n] e^{sign * j2pi n q step} for
// q = 0..bins-1, i.e. a DFT restricted to a finely spaced frequency grid.
// Small sizes are evaluated directly; larger ones use the chirp-z (Bluestein)
// factorisation through power-of-two FFTs.

#include <bit>
#include <vector>

#include "isac/core.hpp"
#include "isac/fft.hpp"

namespace isac {

class ZoomTransform {
 public:
  ZoomTransform(std::size_t length, std::size_t bins, double step, int sign)
      : length_(length), bins_(bins), step_(step), sign_(sign >= 0 ? 1 : -1) {
    if (length == 0 || bins == 0) throw ParameterError("zoom: empty transform");
    if (length * bins > kDirectLimit) prepare_chirp();
  }

  std::size_t length() const { return length_; }
  std::size_t bins() const { return bins_; }

  std::vector<cplx> operator()(std::span<const cplx> x) const {
    if (x.size() != length_) throw DimensionError("zoom: input length mismatch");
    return fft_size_ == 0 ? direct(x) : chirp(x);
  }

  /// Reference evaluation by explicit summation; used as the test oracle.
  std::vector<cplx> direct(std::span<const cplx> x) const {
    std::vector<cplx> out(bins_);
    for (std::size_t q = 0; q < bins_; ++q) {
      const cplx w = std::polar(1.0, sign_ * 2.0 * kPi * static_cast<double>(q) * step_);
      // Horner evaluation of sum_n x[n] w^n.
      cplx acc{};
      for (std::size_t n = length_; n-- > 0;) acc = acc * w + x[n];
      out[q] = acc;
    }
    return out;
  }

 private:
  static constexpr std::size_t kDirectLimit = 4096;

  // phase of W^{k^2/2} with W = e^{sign j2pi step}
  double half_square_phase(double k) const { return sign_ * kPi * step_ * k * k; }

  void prepare_chirp() {
    fft_size_ = std::bit_ceil(length_ + bins_ - 1);
    pre_.resize(length_);
    for (std::size_t n = 0; n < length_; ++n) pre_[n] = std::polar(1.0, half_square_phase(static_cast<double>(n)));
    post_.resize(bins_);
    for (std::size_t q = 0; q < bins_; ++q) post_[q] = std::polar(1.0, half_square_phase(static_cast<double>(q)));
    // kernel W^{-k^2/2} for k = -(length-1) .. bins-1, laid out circularly
    kernel_.assign(fft_size_, cplx{});
    for (std::size_t k = 0; k < bins_; ++k) kernel_[k] = std::polar(1.0, -half_square_phase(static_cast<double>(k)));
    for (std::size_t k = 1; k < length_; ++k)
      kernel_[fft_size_ - k] = std::polar(1.0, -half_square_phase(static_cast<double>(k)));
    fft::forward(kernel_);
  }

  std::vector<cplx> chirp(std::span<const cplx> x) const {
    std::vector<cplx> work(fft_size_);
    for (std::size_t n = 0; n < length_; ++n) work[n] = x[n] * pre_[n];
    fft::forward(work);
    for (std::size_t i = 0; i < fft_size_; ++i) work[i] *= kernel_[i];
    fft::inverse(work);
    const double scale = 1.0 / static_cast<double>(fft_size_);
    std::vector<cplx> out(bins_);
    for (std::size_t q = 0; q < bins_; ++q) out[q] = work[q] * post_[q] * scale;
    return out;
  }

  std::size_t length_, bins_;
  double step_;
  double sign_;
  std::size_t fft_size_ = 0;
  std::vector<cplx> pre_, post_, kernel_;
};

template <typename T>
std::size_t argmax(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace isac

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using cplx = std::complex<double>;

/// Propagation speed used throughout (m/s). The reference bin widths
/// (39.0625 m, 7.8125 m/s, 19.53125 m) are exact with this value.
inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Each maps to one CLI exit code (see tools/isac_cli.cpp).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct ModelViolationError : Error {
  using Error::Error;
};
struct DegenerateInputError : Error {
  using Error::Error;
};
struct NumericLimitError : Error {
  using Error::Error;
};

/// Dense row-major matrix. Rows index subcarriers (or groups), columns
/// index symbols (or samples within a group).
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T> col(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using CMatrix = Matrix<cplx>;
using RMatrix = Matrix<double>;

inline double energy(std::span<const cplx> x) {
  double e = 0.0;
  for (const auto& v : x) e += std::norm(v);
  return e;
}

inline double db10(double ratio) { return 10.0 * std::log10(ratio); }
inline double from_db10(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace isac

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace reside {

using Complex = std::complex<double>;

// 2-D complex raster, row-major. Used for images, k-space, and solver
// iterates alike; the interpretation is up to the caller.
class ComplexGrid {
 public:
  ComplexGrid() = default;

  ComplexGrid(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("ComplexGrid: zero dimension");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  bool same_shape(const ComplexGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const {
    for (const auto& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  double norm2() const {
    double acc = 0.0;
    for (const auto& v : data_) acc += std::norm(v);
    return std::sqrt(acc);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

// Conjugate inner product <a, b> = sum conj(a_i) * b_i.
inline Complex inner(const ComplexGrid& a, const ComplexGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("inner: shape mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline ComplexGrid operator+(const ComplexGrid& a, const ComplexGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("grid +: shape mismatch");
  ComplexGrid out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline ComplexGrid operator-(const ComplexGrid& a, const ComplexGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("grid -: shape mismatch");
  ComplexGrid out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline ComplexGrid operator*(double s, const ComplexGrid& a) {
  ComplexGrid out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

// Boolean k-space selection pattern, row-major, DC at index (0,0).
class SamplingMask {
 public:
  SamplingMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> keep)
      : rows_(rows), cols_(cols), keep_(std::move(keep)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("SamplingMask: zero dimension");
    if (keep_.size() != rows * cols) throw std::invalid_argument("SamplingMask: size mismatch");
    for (std::size_t i = 0; i < keep_.size(); ++i) {
      if (keep_[i] > 1) throw std::invalid_argument("SamplingMask: entries must be 0 or 1");
      samples_ += keep_[i];
    }
    if (samples_ == 0) throw std::invalid_argument("SamplingMask: no sampled entries");
  }

  static SamplingMask full(std::size_t rows, std::size_t cols) {
    return SamplingMask(rows, cols, std::vector<std::uint8_t>(rows * cols, 1));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return keep_.size(); }
  std::size_t sample_count() const { return samples_; }

  bool keep(std::size_t r, std::size_t c) const { return keep_[r * cols_ + c] != 0; }
  bool keep_at(std::size_t i) const { return keep_[i] != 0; }
  const std::vector<std::uint8_t>& raw() const { return keep_; }

  // R = N / m; > 1 means underdetermined.
  double acceleration() const {
    return static_cast<double>(rows_ * cols_) / static_cast<double>(samples_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> keep_;
  std::size_t samples_ = 0;
};

}  // namespace reside

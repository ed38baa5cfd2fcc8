#pragma once

// Orthonormal Haar analysis/synthesis and the complex soft-threshold, which
// together realize the prox of nu*lambda*||Psi x||_1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "reside/grid.hpp"

namespace reside {

struct WaveletConfig {
  std::size_t levels = 4;
  double lambda = 0.0;  // regularization weight, >= 0
};

namespace wavelet_detail {

const double kInvSqrt2 = 0.70710678118654752440084436210485;

inline void check_divisible(std::size_t rows, std::size_t cols, std::size_t levels) {
  if (levels < 1) throw std::invalid_argument("dwt2: levels must be >= 1");
  const std::size_t div = std::size_t{1} << levels;
  if (rows % div != 0 || cols % div != 0)
    throw std::invalid_argument("dwt2: grid dimensions must be divisible by 2^levels");
}

// One analysis sweep along the leading rows/cols sub-block, rows then cols.
inline void analyze_block(ComplexGrid& g, std::size_t rows, std::size_t cols) {
  std::vector<Complex> tmp(std::max(rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols / 2; ++c) {
      const Complex a = g(r, 2 * c), b = g(r, 2 * c + 1);
      tmp[c] = (a + b) * kInvSqrt2;
      tmp[cols / 2 + c] = (a - b) * kInvSqrt2;
    }
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = tmp[c];
  }
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows / 2; ++r) {
      const Complex a = g(2 * r, c), b = g(2 * r + 1, c);
      tmp[r] = (a + b) * kInvSqrt2;
      tmp[rows / 2 + r] = (a - b) * kInvSqrt2;
    }
    for (std::size_t r = 0; r < rows; ++r) g(r, c) = tmp[r];
  }
}

inline void synthesize_block(ComplexGrid& g, std::size_t rows, std::size_t cols) {
  std::vector<Complex> tmp(std::max(rows, cols));
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows / 2; ++r) {
      const Complex s = g(r, c), d = g(rows / 2 + r, c);
      tmp[2 * r] = (s + d) * kInvSqrt2;
      tmp[2 * r + 1] = (s - d) * kInvSqrt2;
    }
    for (std::size_t r = 0; r < rows; ++r) g(r, c) = tmp[r];
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols / 2; ++c) {
      const Complex s = g(r, c), d = g(r, cols / 2 + c);
      tmp[2 * c] = (s + d) * kInvSqrt2;
      tmp[2 * c + 1] = (s - d) * kInvSqrt2;
    }
    for (std::size_t c = 0; c < cols; ++c) g(r, c) = tmp[c];
  }
}

}  // namespace wavelet_detail

// Multi-level Haar analysis in the standard Mallat layout: each level
// transforms the top-left approximation block of the previous one.
inline ComplexGrid dwt2(const ComplexGrid& img, std::size_t levels) {
  wavelet_detail::check_divisible(img.rows(), img.cols(), levels);
  ComplexGrid out = img;
  std::size_t rows = img.rows(), cols = img.cols();
  for (std::size_t l = 0; l < levels; ++l) {
    wavelet_detail::analyze_block(out, rows, cols);
    rows /= 2;
    cols /= 2;
  }
  return out;
}

inline ComplexGrid idwt2(const ComplexGrid& coeffs, std::size_t levels) {
  wavelet_detail::check_divisible(coeffs.rows(), coeffs.cols(), levels);
  ComplexGrid out = coeffs;
  for (std::size_t l = levels; l > 0; --l) {
    const std::size_t rows = out.rows() >> (l - 1);
    const std::size_t cols = out.cols() >> (l - 1);
    wavelet_detail::synthesize_block(out, rows, cols);
  }
  return out;
}

// Magnitude shrinkage, phase preserved; the exact prox of t*|.| on C.
inline Complex soft_threshold(Complex v, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  const double mag = std::abs(v);
  if (mag <= t) return Complex(0.0, 0.0);
  return v * ((mag - t) / mag);
}

// prox of nu*lambda*||Psi .||_1 under an orthonormal Psi:
// Psi^H ∘ soft(., nu*lambda) ∘ Psi. Exact identity when the weight is zero.
inline ComplexGrid wavelet_prox_denoise(const ComplexGrid& u, const WaveletConfig& cfg,
                                        double nu) {
  const double t = nu * cfg.lambda;
  if (t == 0.0) return u;
  ComplexGrid coeffs = dwt2(u, cfg.levels);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = soft_threshold(coeffs[i], t);
  return idwt2(coeffs, cfg.levels);
}

}  // namespace reside

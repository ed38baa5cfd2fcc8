#pragma once

// Unitary 2-D DFT, DC at (0,0). Power-of-two lengths use iterative radix-2;
// everything else goes through Bluestein's chirp-z, so any grid size works.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "reside/grid.hpp"

namespace reside {
namespace fft_detail {

constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place radix-2 Cooley-Tukey, unnormalized. sign = -1 forward, +1 inverse.
inline void fft_pow2(std::vector<Complex>& a, int sign) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    const Complex wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex u = a[i + k];
        Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Bluestein chirp-z for arbitrary n, unnormalized. Phase arguments are
// reduced with j^2 mod 2n in exact integer arithmetic before the trig call.
inline void fft_bluestein(std::vector<Complex>& a, int sign) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  const std::size_t m = next_pow2(2 * n - 1);

  std::vector<Complex> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t sq = (static_cast<std::uint64_t>(j) * j) % (2 * n);
    const double ang = sign * kPi * static_cast<double>(sq) / static_cast<double>(n);
    chirp[j] = Complex(std::cos(ang), std::sin(ang));
  }

  std::vector<Complex> p(m, Complex(0.0, 0.0));
  std::vector<Complex> q(m, Complex(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) p[j] = a[j] * chirp[j];
  for (std::size_t j = 0; j < n; ++j) {
    q[j] = std::conj(chirp[j]);
    if (j != 0) q[m - j] = std::conj(chirp[j]);
  }
  fft_pow2(p, -1);
  fft_pow2(q, -1);
  for (std::size_t j = 0; j < m; ++j) p[j] *= q[j];
  fft_pow2(p, +1);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < n; ++j) a[j] = p[j] * inv_m * chirp[j];
}

inline void fft_1d(std::vector<Complex>& a, int sign) {
  if (is_pow2(a.size())) {
    fft_pow2(a, sign);
  } else {
    fft_bluestein(a, sign);
  }
}

inline ComplexGrid transform_2d(const ComplexGrid& in, int sign) {
  if (in.size() == 0) throw std::invalid_argument("fft2: empty grid");
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  ComplexGrid out = in;

  std::vector<Complex> line;
  line.resize(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) line[c] = out(r, c);
    fft_1d(line, sign);
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = line[c];
  }
  line.resize(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) line[r] = out(r, c);
    fft_1d(line, sign);
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = line[r];
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  return out;
}

}  // namespace fft_detail

// Unitary forward transform: norm-preserving, so a row-subsampled transform
// has spectral norm exactly 1.
inline ComplexGrid fft2(const ComplexGrid& img) { return fft_detail::transform_2d(img, -1); }

inline ComplexGrid ifft2(const ComplexGrid& ksp) { return fft_detail::transform_2d(ksp, +1); }

}  // namespace reside

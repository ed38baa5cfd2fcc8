#pragma once

// 3x3 marginal median denoiser: median of the real parts and median of the
// imaginary parts over the neighborhood, borders clamped. A cheap generic
// denoiser to plug into the PDS driver.

#include <algorithm>
#include <array>

#include "reside/grid.hpp"

namespace reside {

inline ComplexGrid median_denoise_3x3(const ComplexGrid& img) {
  const long rows = static_cast<long>(img.rows());
  const long cols = static_cast<long>(img.cols());
  ComplexGrid out(img.rows(), img.cols());
  std::array<double, 9> re{}, im{};
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      int k = 0;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = std::clamp(r + dr, 0L, rows - 1);
          const long cc = std::clamp(c + dc, 0L, cols - 1);
          const Complex v = img(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
          re[k] = v.real();
          im[k] = v.imag();
          ++k;
        }
      }
      std::nth_element(re.begin(), re.begin() + 4, re.end());
      std::nth_element(im.begin(), im.begin() + 4, im.end());
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = Complex(re[4], im[4]);
    }
  }
  return out;
}

}  // namespace reside

#pragma once

// Synthetic test image: the classic ten-ellipse head phantom (high-contrast
// intensity variant), optionally given a smooth quadratic phase so the image
// is genuinely complex-valued.

#include <array>
#include <cmath>
#include <stdexcept>

#include "reside/grid.hpp"

namespace reside {

struct PhantomSpec {
  enum class Phase { none, smooth_quadratic };
  std::size_t size = 128;  // n x n grid
  Phase phase = Phase::none;
};

namespace phantom_detail {

struct Ellipse {
  double intensity;  // additive
  double a, b;       // semi-axes (x, y)
  double x0, y0;     // center
  double phi_deg;    // rotation, counter-clockwise
};

// High-contrast head phantom table (intensity, a, b, x0, y0, phi).
inline const std::array<Ellipse, 10>& ellipses() {
  static const std::array<Ellipse, 10> table{{
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
      {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
      {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
      {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
      {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
      {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
      {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
      {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
      {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
  }};
  return table;
}

inline bool inside(const Ellipse& e, double x, double y) {
  const double phi = e.phi_deg * 3.141592653589793238462643383279 / 180.0;
  const double c = std::cos(phi), s = std::sin(phi);
  const double xr = c * (x - e.x0) + s * (y - e.y0);
  const double yr = -s * (x - e.x0) + c * (y - e.y0);
  return (xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0;
}

// Superposition of ellipse intensities at a point in [-1,1]^2, clamped.
inline double magnitude_at(double x, double y) {
  double v = 0.0;
  for (const auto& e : ellipses()) {
    if (inside(e, x, y)) v += e.intensity;
  }
  return std::clamp(v, 0.0, 1.0);
}

// Low-order polynomial phase; coefficients chosen to sweep a few radians
// across the field of view.
inline double phase_at(double x, double y) {
  return 3.141592653589793238462643383279 *
         (0.3 * x + 0.5 * y + 0.7 * x * x - 0.4 * y * y + 0.2 * x * y);
}

}  // namespace phantom_detail

inline ComplexGrid gen_phantom(const PhantomSpec& spec) {
  if (spec.size < 16) throw std::invalid_argument("gen_phantom: size must be >= 16");
  const std::size_t n = spec.size;
  ComplexGrid out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    // pixel centers mapped to [-1, 1]; row index grows downward, y upward
    const double y = -(2.0 * static_cast<double>(r) + 1.0 - static_cast<double>(n)) /
                     static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = (2.0 * static_cast<double>(c) + 1.0 - static_cast<double>(n)) /
                       static_cast<double>(n);
      const double mag = phantom_detail::magnitude_at(x, y);
      if (spec.phase == PhantomSpec::Phase::none) {
        out(r, c) = Complex(mag, 0.0);
      } else {
        const double theta = phantom_detail::phase_at(x, y);
        out(r, c) = Complex(mag * std::cos(theta), mag * std::sin(theta));
      }
    }
  }
  return out;
}

}  // namespace reside

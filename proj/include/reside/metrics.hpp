#pragma once

#include <cmath>
#include <stdexcept>

#include "reside/grid.hpp"

namespace reside {

// 20*log10(||truth - estimate|| / ||truth||), in dB; lower is better.
// Floored at -300 dB so an exact match stays finite.
inline double nmse_db(const ComplexGrid& truth, const ComplexGrid& estimate) {
  if (!truth.same_shape(estimate)) throw std::invalid_argument("nmse_db: shape mismatch");
  const double denom = truth.norm2();
  if (!(denom > 0.0)) throw std::invalid_argument("nmse_db: zero reference image");
  const double err = (truth - estimate).norm2();
  const double ratio = err / denom;
  if (!(ratio > 0.0)) return -300.0;
  const double db = 20.0 * std::log10(ratio);
  return db < -300.0 ? -300.0 : db;
}

}  // namespace reside

#pragma once

// Cartesian undersampling mask generators and measurement synthesis. Masks
// are generated in centered (DC-at-center) coordinates, where "central
// lines" means what it says, then converted to the DC-at-(0,0) layout the
// forward operator uses. The conversion is an exact index permutation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "reside/fft.hpp"
#include "reside/grid.hpp"
#include "reside/operators.hpp"
#include "reside/rng.hpp"

namespace reside {

// centered index c for unshifted index k: DC (k=0) moves to floor(n/2)
inline std::size_t shift_to_centered(std::size_t k, std::size_t n) {
  return (k + n / 2) % n;
}

inline std::size_t shift_from_centered(std::size_t c, std::size_t n) {
  return (c + n - n / 2) % n;
}

struct MaskSpec {
  enum class Kind { variable_density_1d, uniform_random_2d, full };
  Kind kind = Kind::uniform_random_2d;
  double target_r = 1.8;       // acceleration, > 1 for undersampling
  std::size_t acs_lines = 32;  // fully sampled central band
  std::uint64_t seed = 0;
};

namespace mask_detail {

// Weighted sampling without replacement: repeatedly invert the discrete CDF
// over the remaining candidates.
inline std::vector<std::size_t> weighted_draw(std::vector<double> weights, std::size_t count,
                                              Rng& rng) {
  std::vector<std::size_t> alive(weights.size());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    double total = 0.0;
    for (std::size_t i : alive) total += weights[i];
    double target = rng.uniform() * total;
    std::size_t chosen_pos = alive.size() - 1;
    double acc = 0.0;
    for (std::size_t pos = 0; pos < alive.size(); ++pos) {
      acc += weights[alive[pos]];
      if (target < acc) {
        chosen_pos = pos;
        break;
      }
    }
    picked.push_back(alive[chosen_pos]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(chosen_pos));
  }
  return picked;
}

}  // namespace mask_detail

// Generates a sampling pattern hitting target_R within 5%. M1 keeps whole
// phase-encode lines (rows); M2 keeps individual points plus a central
// ACS block.
inline SamplingMask gen_mask(const MaskSpec& spec, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("gen_mask: zero dimension");
  if (spec.kind != MaskSpec::Kind::full && !(spec.target_r >= 1.0))
    throw std::invalid_argument("gen_mask: target acceleration must be >= 1");

  std::vector<std::uint8_t> centered(rows * cols, 0);
  Rng rng(derive_seed(spec.seed, 0, Stream::mask));

  if (spec.kind == MaskSpec::Kind::full) {
    std::fill(centered.begin(), centered.end(), std::uint8_t{1});
  } else if (spec.kind == MaskSpec::Kind::variable_density_1d) {
    if (spec.acs_lines > rows) throw std::invalid_argument("gen_mask: acs_lines exceeds rows");
    const std::size_t want_rows = static_cast<std::size_t>(
        std::llround(static_cast<double>(rows) / spec.target_r));
    if (want_rows < 1 || want_rows > rows)
      throw std::invalid_argument("gen_mask: infeasible acceleration");
    const std::size_t acs_start = rows / 2 - spec.acs_lines / 2;
    std::vector<bool> row_on(rows, false);
    for (std::size_t i = 0; i < spec.acs_lines; ++i) row_on[acs_start + i] = true;
    if (spec.acs_lines > want_rows)
      throw std::invalid_argument("gen_mask: ACS band alone exceeds the sample budget");

    // Gaussian density over the centered phase-encode index
    const double center = (static_cast<double>(rows) - 1.0) / 2.0;
    const double std_dev = static_cast<double>(rows) / 6.0;
    std::vector<double> weights;
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < rows; ++r) {
      if (row_on[r]) continue;
      const double d = (static_cast<double>(r) - center) / std_dev;
      weights.push_back(std::exp(-0.5 * d * d));
      candidates.push_back(r);
    }
    const std::size_t extra = want_rows - spec.acs_lines;
    const auto picked = mask_detail::weighted_draw(weights, extra, rng);
    for (std::size_t pos : picked) row_on[candidates[pos]] = true;

    for (std::size_t r = 0; r < rows; ++r) {
      if (!row_on[r]) continue;
      std::fill(centered.begin() + static_cast<std::ptrdiff_t>(r * cols),
                centered.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols), std::uint8_t{1});
    }
  } else {  // uniform_random_2d
    if (spec.acs_lines > rows || spec.acs_lines > cols)
      throw std::invalid_argument("gen_mask: acs_lines exceeds grid");
    const std::size_t total = rows * cols;
    const std::size_t want = static_cast<std::size_t>(
        std::llround(static_cast<double>(total) / spec.target_r));
    const std::size_t acs_r0 = rows / 2 - spec.acs_lines / 2;
    const std::size_t acs_c0 = cols / 2 - spec.acs_lines / 2;
    const std::size_t acs_count = spec.acs_lines * spec.acs_lines;
    if (acs_count > want)
      throw std::invalid_argument("gen_mask: ACS block alone exceeds the sample budget");

    for (std::size_t r = 0; r < spec.acs_lines; ++r) {
      for (std::size_t c = 0; c < spec.acs_lines; ++c) {
        centered[(acs_r0 + r) * cols + (acs_c0 + c)] = 1;
      }
    }
    std::vector<std::size_t> candidates;
    candidates.reserve(total - acs_count);
    for (std::size_t i = 0; i < total; ++i) {
      if (!centered[i]) candidates.push_back(i);
    }
    // partial Fisher-Yates: the first `extra` slots become the draw
    const std::size_t extra = want - acs_count;
    for (std::size_t i = 0; i < extra; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(
                                    rng.uniform_index(candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
      centered[candidates[i]] = 1;
    }
  }

  // convert centered -> DC-at-(0,0)
  std::vector<std::uint8_t> unshifted(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      unshifted[shift_from_centered(r, rows) * cols + shift_from_centered(c, cols)] =
          centered[r * cols + c];
    }
  }
  SamplingMask mask(rows, cols, std::move(unshifted));

  if (spec.kind != MaskSpec::Kind::full) {
    const double achieved = mask.acceleration();
    if (std::abs(achieved - spec.target_r) > 0.05 * spec.target_r)
      throw std::invalid_argument("gen_mask: achieved acceleration off target by more than 5%");
  }
  return mask;
}

// y = M (F x + eta), eta complex Gaussian with per-component std noise_std.
// Noise is drawn only at sampled locations, in row-major order.
inline ComplexGrid synthesize_measurements(const ComplexGrid& x, const SamplingMask& mask,
                                           double noise_std, std::uint64_t seed) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    throw std::invalid_argument("synthesize_measurements: shape mismatch");
  if (noise_std < 0.0) throw std::invalid_argument("synthesize_measurements: negative noise");
  ComplexGrid y = fft2(x);
  Rng rng(derive_seed(seed, 0, Stream::measurement));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!mask.keep_at(i)) {
      y[i] = Complex(0.0, 0.0);
    } else if (noise_std > 0.0) {
      y[i] += Complex(noise_std * rng.normal(), noise_std * rng.normal());
    }
  }
  return y;
}

}  // namespace reside

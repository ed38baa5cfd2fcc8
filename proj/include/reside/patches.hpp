#pragma once

// Aligned noisy/clean patch pair extraction: both patches of a pair share
// one uniformly drawn top-left corner, the noisy one cut from the perturbed
// image and the clean one from the current estimate.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "reside/grid.hpp"
#include "reside/rng.hpp"
#include "reside/tensor.hpp"

namespace reside {

struct PatchPlan {
  std::size_t count = 144;
  std::size_t size = 64;
  std::uint64_t rng_seed = 0;
};

template <typename T>
struct PatchPair {
  ChannelImage<T> noisy;
  ChannelImage<T> clean;
};

template <typename T>
ChannelImage<T> extract_patch(const ComplexGrid& g, std::size_t r0, std::size_t c0,
                              std::size_t size) {
  ChannelImage<T> out(2, size, size);
  const std::size_t hw = size * size;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const Complex v = g(r0 + r, c0 + c);
      out.values[r * size + c] = static_cast<T>(v.real());
      out.values[hw + r * size + c] = static_cast<T>(v.imag());
    }
  }
  return out;
}

// Corners are drawn with replacement, uniformly over all valid positions.
inline std::vector<std::pair<std::size_t, std::size_t>> draw_patch_corners(
    std::size_t rows, std::size_t cols, const PatchPlan& plan) {
  if (plan.size == 0 || plan.count == 0) throw std::invalid_argument("PatchPlan: empty plan");
  if (plan.size > rows || plan.size > cols)
    throw std::invalid_argument("extract_patch_pairs: patch larger than image");
  Rng rng(derive_seed(plan.rng_seed, 0, Stream::patches));
  std::vector<std::pair<std::size_t, std::size_t>> corners(plan.count);
  for (auto& corner : corners) {
    corner.first = static_cast<std::size_t>(rng.uniform_index(rows - plan.size + 1));
    corner.second = static_cast<std::size_t>(rng.uniform_index(cols - plan.size + 1));
  }
  return corners;
}

template <typename T>
std::vector<PatchPair<T>> extract_patch_pairs(const ComplexGrid& clean, const ComplexGrid& noisy,
                                              const PatchPlan& plan) {
  if (!clean.same_shape(noisy))
    throw std::invalid_argument("extract_patch_pairs: image shape mismatch");
  const auto corners = draw_patch_corners(clean.rows(), clean.cols(), plan);
  std::vector<PatchPair<T>> pairs;
  pairs.reserve(corners.size());
  for (const auto& [r0, c0] : corners) {
    pairs.push_back(PatchPair<T>{extract_patch<T>(noisy, r0, c0, plan.size),
                                 extract_patch<T>(clean, r0, c0, plan.size)});
  }
  return pairs;
}

}  // namespace reside

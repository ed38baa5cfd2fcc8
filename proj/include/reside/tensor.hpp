#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "reside/grid.hpp"

namespace reside {

// Dense multi-channel raster with contiguous channel planes:
// values[c*H*W + y*W + x]. A plane-contiguous buffer maps onto a
// column-major (H*W) x C matrix without copying, which is what the
// convolution kernels operate on.
template <typename T>
struct ChannelImage {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> values;

  ChannelImage() = default;
  ChannelImage(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), values(c * h * w, T(0)) {
    if (c == 0 || h == 0 || w == 0) throw std::invalid_argument("ChannelImage: zero dimension");
  }

  std::size_t plane_size() const { return height * width; }

  T& at(std::size_t c, std::size_t y, std::size_t x) {
    return values[c * plane_size() + y * width + x];
  }
  const T& at(std::size_t c, std::size_t y, std::size_t x) const {
    return values[c * plane_size() + y * width + x];
  }
};

// Real/imaginary split into two channels.
template <typename T>
ChannelImage<T> to_two_channel(const ComplexGrid& g) {
  ChannelImage<T> out(2, g.rows(), g.cols());
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = static_cast<T>(g[i].real());
    out.values[n + i] = static_cast<T>(g[i].imag());
  }
  return out;
}

template <typename T>
ComplexGrid from_two_channel(const ChannelImage<T>& img) {
  if (img.channels != 2) throw std::invalid_argument("from_two_channel: need 2 channels");
  ComplexGrid out(img.height, img.width);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = Complex(static_cast<double>(img.values[i]), static_cast<double>(img.values[n + i]));
  }
  return out;
}

}  // namespace reside

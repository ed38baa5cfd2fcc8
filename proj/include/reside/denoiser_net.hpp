#pragma once

// Fixed residual CNN denoiser: five 3x3 same-padded convolutions with ReLU
// between the first four and a global input-to-output skip, operating on
// two-channel (real/imaginary) rasters. Forward and reverse passes are
// im2col + GEMM; the scalar type is a template parameter so the float
// production path and the double verification path share all code.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "reside/rng.hpp"
#include "reside/tensor.hpp"

namespace reside {

namespace net_detail {

constexpr int kLayers = 5;
constexpr int kKernel = 3;
constexpr std::array<std::size_t, kLayers> kInChannels{2, 64, 64, 64, 64};
constexpr std::array<std::size_t, kLayers> kOutChannels{64, 64, 64, 64, 2};

constexpr std::size_t weight_count(int layer) {
  return kInChannels[layer] * kKernel * kKernel * kOutChannels[layer];
}

constexpr std::size_t layer_param_count(int layer) {
  return weight_count(layer) + kOutChannels[layer];
}

constexpr std::size_t layer_offset(int layer) {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) off += layer_param_count(l);
  return off;
}

}  // namespace net_detail

template <typename T>
class DenoiserNet {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;  // column-major
  using WeightMap = Eigen::Map<Mat>;
  using ConstWeightMap = Eigen::Map<const Mat>;
  using BiasMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
  using ConstBiasMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

  static constexpr int layer_count() { return net_detail::kLayers; }
  static constexpr std::size_t in_channels(int l) { return net_detail::kInChannels[l]; }
  static constexpr std::size_t out_channels(int l) { return net_detail::kOutChannels[l]; }

  static constexpr std::size_t parameter_count() {
    return net_detail::layer_offset(net_detail::kLayers);
  }

  DenoiserNet() : params_(parameter_count(), T(0)) {}

  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }

  // Weights of layer l as a (IC*9) x OC matrix; flat storage is therefore
  // ordered [oc][ic][ky][kx].
  WeightMap weights(int l) {
    return WeightMap(params_.data() + net_detail::layer_offset(l),
                     static_cast<Eigen::Index>(in_channels(l) * 9),
                     static_cast<Eigen::Index>(out_channels(l)));
  }
  ConstWeightMap weights(int l) const {
    return ConstWeightMap(params_.data() + net_detail::layer_offset(l),
                          static_cast<Eigen::Index>(in_channels(l) * 9),
                          static_cast<Eigen::Index>(out_channels(l)));
  }
  BiasMap biases(int l) {
    return BiasMap(params_.data() + net_detail::layer_offset(l) + net_detail::weight_count(l),
                   static_cast<Eigen::Index>(out_channels(l)));
  }
  ConstBiasMap biases(int l) const {
    return ConstBiasMap(
        params_.data() + net_detail::layer_offset(l) + net_detail::weight_count(l),
        static_cast<Eigen::Index>(out_channels(l)));
  }

  bool all_finite() const {
    for (const T& p : params_) {
      if (!std::isfinite(static_cast<double>(p))) return false;
    }
    return true;
  }

  // Kaiming-uniform fan-in initialization for the hidden kernels, zero
  // biases, and a zero-initialized last layer so the freshly drawn net
  // starts as the identity map; with per-iteration training budgets in the
  // tens of steps the optimizer cannot afford to first unlearn a random
  // residual path. Draw order is fixed: layers in order, weights in flat
  // storage order (the last layer's draws are consumed and discarded so the
  // stream layout does not depend on this choice).
  void init_random(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0, Stream::net_init));
    for (int l = 0; l < layer_count(); ++l) {
      const double fan_in = static_cast<double>(in_channels(l) * 9);
      const double bound = std::sqrt(6.0 / fan_in);
      const bool last = l + 1 == layer_count();
      T* w = params_.data() + net_detail::layer_offset(l);
      for (std::size_t i = 0; i < net_detail::weight_count(l); ++i) {
        const double draw = (2.0 * rng.uniform() - 1.0) * bound;
        w[i] = last ? T(0) : static_cast<T>(draw);
      }
      biases(l).setZero();
    }
  }

 private:
  std::vector<T> params_;
};

namespace net_detail {

// im2col for a 3x3 same-padded convolution. `in` is (H*W) x IC, `col`
// becomes (H*W) x (IC*9) with column q = ic*9 + (ky*3+kx) holding the input
// plane shifted by (ky-1, kx-1), zero-filled at the borders.
template <typename T>
void im2col(const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>>& in,
            std::size_t height, std::size_t width,
            Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& col) {
  const std::size_t hw = height * width;
  const std::size_t ic = static_cast<std::size_t>(in.cols());
  col.resize(static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(ic * 9));
  for (std::size_t c = 0; c < ic; ++c) {
    const T* plane = in.data() + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      const int dy = ky - 1;
      for (int kx = 0; kx < 3; ++kx) {
        const int dx = kx - 1;
        T* dst = col.data() + (c * 9 + static_cast<std::size_t>(ky * 3 + kx)) * hw;
        const std::size_t x_lo = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
        const std::size_t x_hi = dx > 0 ? width - static_cast<std::size_t>(dx) : width;
        for (std::size_t y = 0; y < height; ++y) {
          T* row = dst + y * width;
          const long yy = static_cast<long>(y) + dy;
          if (yy < 0 || yy >= static_cast<long>(height)) {
            std::fill(row, row + width, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(yy) * width;
          if (x_lo > 0) row[0] = T(0);
          if (x_hi < width) row[width - 1] = T(0);
          for (std::size_t x = x_lo; x < x_hi; ++x) row[x] = src[x + static_cast<std::size_t>(dx)];
        }
      }
    }
  }
}

// Transpose of im2col: scatter-add the columns back onto channel planes.
template <typename T>
void col2im_accumulate(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& col,
                       std::size_t height, std::size_t width,
                       Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& out) {
  const std::size_t hw = height * width;
  const std::size_t ic = static_cast<std::size_t>(col.cols()) / 9;
  out.setZero();
  for (std::size_t c = 0; c < ic; ++c) {
    T* plane = out.data() + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      const int dy = ky - 1;
      for (int kx = 0; kx < 3; ++kx) {
        const int dx = kx - 1;
        const T* src = col.data() + (c * 9 + static_cast<std::size_t>(ky * 3 + kx)) * hw;
        const std::size_t x_lo = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
        const std::size_t x_hi = dx > 0 ? width - static_cast<std::size_t>(dx) : width;
        for (std::size_t y = 0; y < height; ++y) {
          const long yy = static_cast<long>(y) + dy;
          if (yy < 0 || yy >= static_cast<long>(height)) continue;
          T* drow = plane + static_cast<std::size_t>(yy) * width;
          const T* srow = src + y * width;
          for (std::size_t x = x_lo; x < x_hi; ++x) {
            drow[x + static_cast<std::size_t>(dx)] += srow[x];
          }
        }
      }
    }
  }
}

}  // namespace net_detail

// Scratch buffers for one sample; reuse across calls to avoid reallocation.
template <typename T>
struct NetWorkspace {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  std::array<Mat, net_detail::kLayers> col;   // im2col per layer
  std::array<Mat, net_detail::kLayers> act;   // post-activation outputs per layer
  Mat delta, delta_prev, dcol;
};

// Forward pass on a (H*W) x 2 input map; returns (H*W) x 2 output including
// the skip term. When `ws` caches are kept the workspace can drive a
// backward pass afterwards.
template <typename T>
void net_forward_impl(const DenoiserNet<T>& net,
                      const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>>& in,
                      std::size_t height, std::size_t width, NetWorkspace<T>& ws,
                      Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& out) {
  for (int l = 0; l < net_detail::kLayers; ++l) {
    if (l == 0) {
      net_detail::im2col<T>(in, height, width, ws.col[l]);
    } else {
      net_detail::im2col<T>(ws.act[l - 1], height, width, ws.col[l]);
    }
    ws.act[l].noalias() = ws.col[l] * net.weights(l);
    ws.act[l].rowwise() += net.biases(l).transpose();
    if (l + 1 < net_detail::kLayers) {
      ws.act[l] = ws.act[l].cwiseMax(T(0));
    }
  }
  out = ws.act[net_detail::kLayers - 1] + in;
}

// Reverse pass. `dout` is dLoss/d(output); parameter gradients are written
// into `grads` (same flat layout as the parameters). The gradient w.r.t. the
// network input is not needed for training and is not produced.
template <typename T>
void net_backward_impl(const DenoiserNet<T>& net, std::size_t height, std::size_t width,
                       NetWorkspace<T>& ws,
                       const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& dout,
                       std::vector<T>& grads) {
  grads.assign(DenoiserNet<T>::parameter_count(), T(0));
  ws.delta = dout;
  for (int l = net_detail::kLayers - 1; l >= 0; --l) {
    typename DenoiserNet<T>::WeightMap dw(
        grads.data() + net_detail::layer_offset(l),
        static_cast<Eigen::Index>(DenoiserNet<T>::in_channels(l) * 9),
        static_cast<Eigen::Index>(DenoiserNet<T>::out_channels(l)));
    typename DenoiserNet<T>::BiasMap db(
        grads.data() + net_detail::layer_offset(l) + net_detail::weight_count(l),
        static_cast<Eigen::Index>(DenoiserNet<T>::out_channels(l)));
    dw.noalias() = ws.col[l].transpose() * ws.delta;
    db = ws.delta.colwise().sum().transpose();
    if (l == 0) break;
    ws.dcol.noalias() = ws.delta * net.weights(l).transpose();
    ws.delta_prev.resize(static_cast<Eigen::Index>(height * width),
                         static_cast<Eigen::Index>(DenoiserNet<T>::in_channels(l)));
    net_detail::col2im_accumulate<T>(ws.dcol, height, width, ws.delta_prev);
    // ReLU mask: zero where the cached post-activation is zero
    ws.delta = ws.delta_prev.cwiseProduct(
        (ws.act[l - 1].array() > T(0)).template cast<T>().matrix());
  }
}

// f(patch): output shape equals input shape, and all-zero parameters give
// the identity map through the skip connection.
template <typename T>
ChannelImage<T> net_forward(const DenoiserNet<T>& net, const ChannelImage<T>& patch) {
  if (patch.channels != 2) throw std::invalid_argument("net_forward: input must have 2 channels");
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Map<const Mat> in(patch.values.data(), static_cast<Eigen::Index>(patch.plane_size()), 2);
  NetWorkspace<T> ws;
  Mat out;
  net_forward_impl<T>(net, in, patch.height, patch.width, ws, out);
  ChannelImage<T> result(2, patch.height, patch.width);
  Eigen::Map<Mat>(result.values.data(), out.rows(), 2) = out;
  return result;
}

// Squared-error loss over all pixels and channels of one sample, plus the
// exact parameter gradient. Batching (mean over samples) is the trainer's
// job; this function is per-sample.
template <typename T>
double net_gradient(const DenoiserNet<T>& net, const ChannelImage<T>& noisy,
                    const ChannelImage<T>& clean, std::vector<T>& grads, NetWorkspace<T>& ws) {
  if (noisy.channels != 2 || clean.channels != 2)
    throw std::invalid_argument("net_gradient: patches must have 2 channels");
  if (noisy.height != clean.height || noisy.width != clean.width)
    throw std::invalid_argument("net_gradient: shape mismatch");
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const std::size_t hw = noisy.plane_size();
  Eigen::Map<const Mat> in(noisy.values.data(), static_cast<Eigen::Index>(hw), 2);
  Eigen::Map<const Mat> target(clean.values.data(), static_cast<Eigen::Index>(hw), 2);

  Mat out;
  net_forward_impl<T>(net, in, noisy.height, noisy.width, ws, out);

  Mat resid = out - target;
  double loss = 0.0;
  for (Eigen::Index j = 0; j < resid.cols(); ++j) {
    for (Eigen::Index i = 0; i < resid.rows(); ++i) {
      const double r = static_cast<double>(resid(i, j));
      loss += r * r;
    }
  }
  Mat dout = T(2) * resid;
  net_backward_impl<T>(net, noisy.height, noisy.width, ws, dout, grads);
  return loss;
}

template <typename T>
double net_gradient(const DenoiserNet<T>& net, const ChannelImage<T>& noisy,
                    const ChannelImage<T>& clean, std::vector<T>& grads) {
  NetWorkspace<T> ws;
  return net_gradient(net, noisy, clean, grads, ws);
}

}  // namespace reside

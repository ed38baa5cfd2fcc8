#pragma once

// Per-iteration denoiser training: perturb the current estimate once, cut
// aligned patch pairs, initialize a fresh network, and run Adam on the
// squared error. Per-sample gradients may be computed in parallel; they are
// reduced in sample order so the result is independent of the thread count.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "reside/adam.hpp"
#include "reside/denoiser_net.hpp"
#include "reside/grid.hpp"
#include "reside/parallel.hpp"
#include "reside/patches.hpp"
#include "reside/rng.hpp"

namespace reside {

struct TrainSpec {
  std::size_t epochs = 100;
  std::size_t minibatch = 16;
  double lr = 1e-3;
  std::uint64_t init_seed = 0;  // mixed into the per-call seed

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainSpec: epochs must be >= 1");
    if (minibatch < 1) throw std::invalid_argument("TrainSpec: minibatch must be >= 1");
  }
};

// Independent real/imaginary components, each N(0, sigma^2).
inline ComplexGrid add_complex_noise(const ComplexGrid& x, double sigma, std::uint64_t seed) {
  ComplexGrid out = x;
  Rng rng(derive_seed(seed, 0, Stream::noise));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += Complex(sigma * rng.normal(), sigma * rng.normal());
  }
  return out;
}

template <typename T>
struct TrainResult {
  DenoiserNet<T> net;
  double initial_loss = 0.0;  // mean per-sample loss over the first epoch
  double final_loss = 0.0;    // mean per-sample loss over the last epoch
  std::size_t steps = 0;
};

template <typename T = float>
TrainResult<T> train_denoiser(const ComplexGrid& x_prev, double sigma, const PatchPlan& plan,
                              const TrainSpec& spec, std::uint64_t rng_seed,
                              const DenoiserNet<T>* warm_start = nullptr) {
  spec.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("train_denoiser: sigma must be > 0");
  if (plan.size > x_prev.rows() || plan.size > x_prev.cols())
    throw std::invalid_argument("train_denoiser: patch larger than image");

  const std::uint64_t base = mix64(rng_seed ^ mix64(spec.init_seed));
  const ComplexGrid noisy = add_complex_noise(x_prev, sigma, base);
  const auto pairs = extract_patch_pairs<T>(x_prev, noisy, plan);
  const std::size_t sample_count = pairs.size();

  TrainResult<T> result;
  if (warm_start != nullptr) {
    result.net = *warm_start;
  } else {
    result.net.init_random(base);
  }

  AdamState<T> adam(DenoiserNet<T>::parameter_count(), spec.lr);
  Rng shuffle_rng(derive_seed(base, 0, Stream::shuffle));

  std::vector<std::size_t> order(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) order[i] = i;

  const unsigned workers = thread_count();
  std::vector<NetWorkspace<T>> workspaces(std::max<unsigned>(workers, 1));
  std::vector<std::vector<T>> sample_grads(spec.minibatch);
  std::vector<double> sample_losses(spec.minibatch);

  std::vector<T> batch_grad(DenoiserNet<T>::parameter_count());

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_samples = 0;

    for (std::size_t start = 0; start < sample_count; start += spec.minibatch) {
      const std::size_t batch = std::min(spec.minibatch, sample_count - start);

      parallel_for(batch, [&](std::size_t i, unsigned worker) {
        const auto& pair = pairs[order[start + i]];
        sample_losses[i] = net_gradient<T>(result.net, pair.noisy, pair.clean, sample_grads[i],
                                           workspaces[worker]);
      });

      std::fill(batch_grad.begin(), batch_grad.end(), T(0));
      double batch_loss = 0.0;
      const T scale = static_cast<T>(1.0 / static_cast<double>(batch));
      for (std::size_t i = 0; i < batch; ++i) {
        const std::vector<T>& g = sample_grads[i];
        for (std::size_t j = 0; j < batch_grad.size(); ++j) batch_grad[j] += g[j];
        batch_loss += sample_losses[i];
      }
      for (std::size_t j = 0; j < batch_grad.size(); ++j) batch_grad[j] *= scale;
      batch_loss /= static_cast<double>(batch);

      adam_step(result.net.params(), batch_grad, adam);
      result.steps += 1;
      epoch_loss += batch_loss * static_cast<double>(batch);
      epoch_samples += batch;
    }

    const double mean_loss = epoch_loss / static_cast<double>(epoch_samples);
    if (epoch == 0) result.initial_loss = mean_loss;
    result.final_loss = mean_loss;
  }
  return result;
}

namespace denoise_detail {
// Receptive radius of the conv path: five 3x3 layers reach 5 pixels out.
constexpr std::size_t kHaloRows = 5;
constexpr std::size_t kBandRows = 64;
}  // namespace denoise_detail

// Apply the trained net to a whole complex image. The net is fully
// convolutional, so the image is processed in fixed horizontal bands with a
// halo wide enough to cover the receptive field; banding bounds the im2col
// workspace without changing which inputs any kept output pixel sees.
template <typename T>
ComplexGrid denoise_image(const DenoiserNet<T>& net, const ComplexGrid& u) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  const std::size_t rows = u.rows(), cols = u.cols();
  const std::size_t band = denoise_detail::kBandRows;

  const ChannelImage<T> input = to_two_channel<T>(u);
  ChannelImage<T> output(2, rows, cols);
  NetWorkspace<T> ws;

  for (std::size_t band_lo = 0; band_lo < rows; band_lo += band) {
    const std::size_t band_hi = std::min(rows, band_lo + band);
    const std::size_t ext_lo = band_lo >= denoise_detail::kHaloRows
                                   ? band_lo - denoise_detail::kHaloRows
                                   : 0;
    const std::size_t ext_hi = std::min(rows, band_hi + denoise_detail::kHaloRows);
    const std::size_t ext_rows = ext_hi - ext_lo;
    const std::size_t hw = ext_rows * cols;

    Mat sub(static_cast<Eigen::Index>(hw), 2);
    for (int ch = 0; ch < 2; ++ch) {
      const T* plane = input.values.data() + static_cast<std::size_t>(ch) * rows * cols;
      std::copy(plane + ext_lo * cols, plane + ext_hi * cols,
                sub.data() + static_cast<std::size_t>(ch) * hw);
    }

    Mat out;
    net_forward_impl<T>(net, sub, ext_rows, cols, ws, out);

    for (int ch = 0; ch < 2; ++ch) {
      T* plane = output.values.data() + static_cast<std::size_t>(ch) * rows * cols;
      const T* src = out.data() + static_cast<std::size_t>(ch) * hw;
      std::copy(src + (band_lo - ext_lo) * cols, src + (band_hi - ext_lo) * cols,
                plane + band_lo * cols);
    }
  }
  return from_two_channel<T>(output);
}

}  // namespace reside

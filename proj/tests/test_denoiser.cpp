#include <catch2/catch_amalgamated.hpp>

#include "reside/adam.hpp"
#include "reside/denoiser_net.hpp"
#include "reside/rng.hpp"

using namespace reside;

namespace {

template <typename T>
ChannelImage<T> random_patch(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  ChannelImage<T> p(2, h, w);
  for (auto& v : p.values) v = static_cast<T>(rng.normal());
  return p;
}

// Direct same-padded cross-correlation of one input channel stack with one
// 3x3 kernel set, evaluated pointwise.
template <typename T>
double conv_reference_at(const DenoiserNet<T>& net, int layer,
                         const ChannelImage<T>& input, std::size_t oc, std::size_t y,
                         std::size_t x) {
  const auto w = net.weights(layer);
  double acc = static_cast<double>(net.biases(layer)(static_cast<Eigen::Index>(oc)));
  for (std::size_t ic = 0; ic < DenoiserNet<T>::in_channels(layer); ++ic) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const long yy = static_cast<long>(y) + ky - 1;
        const long xx = static_cast<long>(x) + kx - 1;
        if (yy < 0 || xx < 0 || yy >= static_cast<long>(input.height) ||
            xx >= static_cast<long>(input.width))
          continue;
        const double wv = static_cast<double>(
            w(static_cast<Eigen::Index>(ic * 9 + static_cast<std::size_t>(ky * 3 + kx)),
              static_cast<Eigen::Index>(oc)));
        acc += wv * static_cast<double>(input.at(ic, static_cast<std::size_t>(yy),
                                                 static_cast<std::size_t>(xx)));
      }
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("parameter count matches the fixed architecture") {
  // 5 conv layers: (2*64 + 64*64*3 + 64*2) * 9 weights + (4*64 + 2) biases
  REQUIRE(DenoiserNet<float>::parameter_count() == 113154);
  REQUIRE((2 * 64 + 64 * 64 * 3 + 64 * 2) * 9 + (4 * 64 + 2) == 113154);
}

TEST_CASE("zero-parameter net is the identity map") {
  DenoiserNet<double> net;
  const auto patch = random_patch<double>(12, 9, 1);
  const auto out = net_forward(net, patch);
  REQUIRE(out.values == patch.values);
}

TEST_CASE("net_forward preserves shape") {
  DenoiserNet<float> net;
  net.init_random(3);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{64, 64}, {33, 47}}) {
    const auto out = net_forward(net, random_patch<float>(h, w, h + w));
    REQUIRE(out.channels == 2);
    REQUIRE(out.height == h);
    REQUIRE(out.width == w);
  }
}

TEST_CASE("net_forward rejects inputs without two channels") {
  DenoiserNet<float> net;
  ChannelImage<float> bad(3, 8, 8);
  REQUIRE_THROWS_AS(net_forward(net, bad), std::invalid_argument);
}

TEST_CASE("first layer matches a hand-evaluated convolution") {
  DenoiserNet<double> net;
  Rng rng(9);
  // small weights keep all ReLU units active or inactive deterministically
  for (auto& p : net.params()) p = 0.01 * rng.normal();
  const auto patch = random_patch<double>(3, 3, 10);

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Map<const Mat> in(patch.values.data(), 9, 2);
  NetWorkspace<double> ws;
  Mat out;
  net_forward_impl<double>(net, in, 3, 3, ws, out);

  // ws.act[0] is the post-ReLU output of layer 1
  for (std::size_t oc = 0; oc < 64; oc += 13) {
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t x = 0; x < 3; ++x) {
        const double ref = std::max(0.0, conv_reference_at(net, 0, patch, oc, y, x));
        const double got = ws.act[0](static_cast<Eigen::Index>(y * 3 + x),
                                     static_cast<Eigen::Index>(oc));
        REQUIRE(std::abs(got - ref) < 1e-12);
      }
    }
  }
}

TEST_CASE("full net output matches a layer-by-layer reference on a 3x3 patch") {
  DenoiserNet<double> net;
  Rng rng(19);
  for (auto& p : net.params()) p = 0.01 * rng.normal();
  const auto patch = random_patch<double>(3, 3, 20);

  ChannelImage<double> cur = patch;
  for (int layer = 0; layer < DenoiserNet<double>::layer_count(); ++layer) {
    ChannelImage<double> next(DenoiserNet<double>::out_channels(layer), 3, 3);
    for (std::size_t oc = 0; oc < next.channels; ++oc) {
      for (std::size_t y = 0; y < 3; ++y) {
        for (std::size_t x = 0; x < 3; ++x) {
          double v = conv_reference_at(net, layer, cur, oc, y, x);
          if (layer + 1 < DenoiserNet<double>::layer_count()) v = std::max(0.0, v);
          next.at(oc, y, x) = v;
        }
      }
    }
    cur = std::move(next);
  }
  for (std::size_t i = 0; i < cur.values.size(); ++i) cur.values[i] += patch.values[i];

  const auto out = net_forward(net, patch);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    REQUIRE(std::abs(out.values[i] - cur.values[i]) < 1e-12);
  }
}

TEST_CASE("perfect prediction gives zero loss and zero gradient") {
  DenoiserNet<double> net;
  net.init_random(4);
  const auto noisy = random_patch<double>(8, 8, 5);
  const auto clean = net_forward(net, noisy);
  std::vector<double> grads;
  const double loss = net_gradient(net, noisy, clean, grads);
  REQUIRE(loss < 1e-20);
  for (double g : grads) REQUIRE(std::abs(g) < 1e-12);
}

TEST_CASE("analytic gradients match central finite differences") {
  DenoiserNet<double> net;
  net.init_random(6);
  const auto noisy = random_patch<double>(8, 8, 7);
  const auto clean = random_patch<double>(8, 8, 8);

  std::vector<double> grads;
  net_gradient(net, noisy, clean, grads);

  Rng rng(12);
  const double step = 1e-5;
  for (int layer = 0; layer < DenoiserNet<double>::layer_count(); ++layer) {
    const std::size_t lo = net_detail::layer_offset(layer);
    const std::size_t count = net_detail::layer_param_count(layer);
    for (int probe = 0; probe < 25; ++probe) {
      const std::size_t idx = lo + rng.uniform_index(count);
      DenoiserNet<double> plus = net, minus = net;
      plus.params()[idx] += step;
      minus.params()[idx] -= step;
      std::vector<double> dummy;
      const double lp = net_gradient(plus, noisy, clean, dummy);
      const double lm = net_gradient(minus, noisy, clean, dummy);
      const double numeric = (lp - lm) / (2.0 * step);
      const double rel = std::abs(grads[idx] - numeric) / (std::abs(grads[idx]) + 1e-8);
      REQUIRE(rel <= 1e-4);
    }
  }
}

TEST_CASE("doubling the residual target doubles the conv5 bias gradient") {
  DenoiserNet<double> net;
  net.init_random(14);
  const auto noisy = random_patch<double>(8, 8, 15);
  const auto base = net_forward(net, noisy);

  // targets offset from the exact output by d and 2d: residuals are -d, -2d
  ChannelImage<double> target1 = base, target2 = base;
  Rng rng(16);
  for (std::size_t i = 0; i < target1.values.size(); ++i) {
    const double d = rng.normal();
    target1.values[i] += d;
    target2.values[i] += 2.0 * d;
  }
  std::vector<double> g1, g2;
  net_gradient(net, noisy, target1, g1);
  net_gradient(net, noisy, target2, g2);
  const std::size_t bias_lo = net_detail::layer_offset(4) + net_detail::weight_count(4);
  for (std::size_t i = bias_lo; i < bias_lo + 2; ++i) {
    REQUIRE(g2[i] == Catch::Approx(2.0 * g1[i]).margin(1e-10));
  }
}

TEST_CASE("net_gradient rejects shape mismatches") {
  DenoiserNet<float> net;
  std::vector<float> grads;
  const auto a = random_patch<float>(8, 8, 1);
  const auto b = random_patch<float>(8, 9, 2);
  REQUIRE_THROWS_AS(net_gradient(net, a, b, grads), std::invalid_argument);
}

TEST_CASE("adam first step moves by almost exactly the learning rate") {
  std::vector<double> params{0.0};
  std::vector<double> grads{1.0};
  AdamState<double> state(1, 1e-3);
  adam_step(params, grads, state);
  REQUIRE(std::abs(params[0] + state.lr) <= 1e-8);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  std::vector<double> params{0.7, -0.3};
  AdamState<double> state(2, 1e-3);
  adam_step(params, std::vector<double>{0.0, 0.0}, state);
  REQUIRE(params[0] == 0.7);
  REQUIRE(params[1] == -0.3);
}

TEST_CASE("adam descends a scalar quadratic") {
  std::vector<double> theta{1.0};
  AdamState<double> state(1, 1e-3);
  double prev = theta[0];
  for (int step = 1; step <= 100; ++step) {
    adam_step(theta, std::vector<double>{2.0 * theta[0]}, state);
    if (step > 3) REQUIRE(std::abs(theta[0]) < std::abs(prev));
    prev = theta[0];
  }
  REQUIRE(std::abs(theta[0]) < 0.95);
}

TEST_CASE("adam matches a straightline reference trace") {
  // independent re-statement of the update equations
  double theta_ref = 1.0, m = 0.0, v = 0.0;
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;

  std::vector<double> theta{1.0};
  AdamState<double> state(1, lr);
  for (int step = 1; step <= 100; ++step) {
    const double g = 2.0 * theta_ref;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / (1.0 - std::pow(b1, step));
    const double vhat = v / (1.0 - std::pow(b2, step));
    theta_ref -= lr * mhat / (std::sqrt(vhat) + eps);

    adam_step(theta, std::vector<double>{2.0 * theta[0]}, state);
    REQUIRE(std::abs(theta[0] - theta_ref) < 1e-12);
  }
}

TEST_CASE("adam rejects mismatched shapes") {
  std::vector<float> params{1.0f};
  AdamState<float> state(2, 1e-3);
  REQUIRE_THROWS_AS(adam_step(params, std::vector<float>{1.0f}, state), std::invalid_argument);
}

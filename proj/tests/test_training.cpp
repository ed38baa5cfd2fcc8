#include <catch2/catch_amalgamated.hpp>

#include "reside/parallel.hpp"
#include "reside/patches.hpp"
#include "reside/rng.hpp"
#include "reside/training.hpp"

using namespace reside;

namespace {

ComplexGrid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  ComplexGrid g(rows, cols);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = Complex(rng.normal(), rng.normal());
  return g;
}

struct ThreadCountGuard {
  explicit ThreadCountGuard(unsigned n) { set_thread_count(n); }
  ~ThreadCountGuard() { set_thread_count(0); }
};

}  // namespace

TEST_CASE("patch pairs share coordinates and stay in bounds") {
  const ComplexGrid clean = random_grid(40, 30, 1);
  ComplexGrid noisy = clean;
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += Complex(0.1, -0.2);

  PatchPlan plan;
  plan.count = 25;
  plan.size = 12;
  plan.rng_seed = 9;

  const auto corners = draw_patch_corners(40, 30, plan);
  REQUIRE(corners.size() == 25);
  for (const auto& [r, c] : corners) {
    REQUIRE(r + plan.size <= 40);
    REQUIRE(c + plan.size <= 30);
  }
  REQUIRE(draw_patch_corners(40, 30, plan) == corners);

  const auto pairs = extract_patch_pairs<double>(clean, noisy, plan);
  REQUIRE(pairs.size() == 25);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < pairs[i].clean.values.size(); ++j) {
      const double diff = pairs[i].noisy.values[j] - pairs[i].clean.values[j];
      const double expected = j < pairs[i].clean.plane_size() ? 0.1 : -0.2;
      REQUIRE(diff == Catch::Approx(expected).margin(1e-12));
    }
  }
}

TEST_CASE("identical images give identical patch pairs") {
  const ComplexGrid img = random_grid(24, 24, 2);
  PatchPlan plan;
  plan.count = 8;
  plan.size = 8;
  plan.rng_seed = 3;
  const auto pairs = extract_patch_pairs<float>(img, img, plan);
  for (const auto& pair : pairs) REQUIRE(pair.noisy.values == pair.clean.values);
}

TEST_CASE("patch extraction rejects oversized patches") {
  const ComplexGrid img = random_grid(16, 16, 4);
  PatchPlan plan;
  plan.count = 2;
  plan.size = 17;
  REQUIRE_THROWS_AS(extract_patch_pairs<float>(img, img, plan), std::invalid_argument);
}

TEST_CASE("training overfits a single patch") {
  const ComplexGrid img = random_grid(32, 32, 5);
  PatchPlan plan;
  plan.count = 1;
  plan.size = 32;
  plan.rng_seed = 6;
  TrainSpec spec;
  spec.epochs = 500;
  spec.minibatch = 1;
  spec.lr = 1e-3;
  const auto result = train_denoiser<float>(img, 0.1, plan, spec, 7);
  REQUIRE(result.final_loss < 0.01 * result.initial_loss);
}

TEST_CASE("training is bit-deterministic across seeds and thread counts") {
  const ComplexGrid img = random_grid(48, 48, 8);
  PatchPlan plan;
  plan.count = 6;
  plan.size = 16;
  plan.rng_seed = 10;
  TrainSpec spec;
  spec.epochs = 3;
  spec.minibatch = 4;

  std::vector<float> p1, p2, p4;
  {
    ThreadCountGuard guard(1);
    p1 = train_denoiser<float>(img, 0.05, plan, spec, 11).net.params();
  }
  {
    ThreadCountGuard guard(2);
    p2 = train_denoiser<float>(img, 0.05, plan, spec, 11).net.params();
  }
  {
    ThreadCountGuard guard(4);
    p4 = train_denoiser<float>(img, 0.05, plan, spec, 11).net.params();
  }
  REQUIRE(p1 == p2);
  REQUIRE(p1 == p4);

  const auto other = train_denoiser<float>(img, 0.05, plan, spec, 12).net.params();
  REQUIRE(p1 != other);
}

TEST_CASE("trained denoiser reduces noise on held-out patches") {
  // piecewise-smooth image rather than white noise, so there is structure
  ComplexGrid img(64, 64);
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      const double v = (r / 16 + c / 16) % 2 == 0 ? 0.9 : 0.2;
      img(r, c) = Complex(v, 0.3 * v);
    }
  }
  const double sigma = 0.08;

  PatchPlan plan;
  plan.count = 24;
  plan.size = 24;
  plan.rng_seed = 13;
  TrainSpec spec;
  spec.epochs = 40;
  spec.minibatch = 8;
  const auto result = train_denoiser<float>(img, sigma, plan, spec, 14);
  REQUIRE(result.final_loss <= result.initial_loss);

  // held-out noise realization
  const ComplexGrid noisy = add_complex_noise(img, sigma, 999);
  const ComplexGrid denoised = denoise_image<float>(result.net, noisy);
  REQUIRE((denoised - img).norm2() < (noisy - img).norm2());
}

TEST_CASE("train_denoiser validates inputs") {
  const ComplexGrid img = random_grid(16, 16, 20);
  PatchPlan plan;
  plan.count = 1;
  plan.size = 8;
  TrainSpec spec;
  spec.epochs = 1;
  REQUIRE_THROWS_AS(train_denoiser<float>(img, 0.0, plan, spec, 1), std::invalid_argument);
  plan.size = 32;
  REQUIRE_THROWS_AS(train_denoiser<float>(img, 0.1, plan, spec, 1), std::invalid_argument);
}

TEST_CASE("denoise_image with a zero net is the identity") {
  DenoiserNet<float> net;
  const ComplexGrid u = random_grid(70, 50, 21);
  const ComplexGrid out = denoise_image(net, u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    REQUIRE(out[i].real() == Catch::Approx(u[i].real()).margin(1e-6));
    REQUIRE(out[i].imag() == Catch::Approx(u[i].imag()).margin(1e-6));
  }
}

TEST_CASE("denoise_image preserves large shapes") {
  DenoiserNet<float> net;
  net.init_random(22);
  for (std::size_t n : {std::size_t{320}, std::size_t{384}}) {
    const ComplexGrid u = random_grid(n, n, n);
    const ComplexGrid out = denoise_image(net, u);
    REQUIRE(out.rows() == n);
    REQUIRE(out.cols() == n);
  }
}

TEST_CASE("whole-image pass equals overlapped tiles on interior pixels") {
  DenoiserNet<double> net;
  net.init_random(23);
  const ComplexGrid u = random_grid(64, 64, 24);
  const ComplexGrid whole = denoise_image<double>(net, u);

  const std::size_t tile = 32, stride = 16, margin = 5;
  for (std::size_t ty = 0; ty + tile <= 64; ty += stride) {
    for (std::size_t tx = 0; tx + tile <= 64; tx += stride) {
      ChannelImage<double> sub(2, tile, tile);
      for (std::size_t r = 0; r < tile; ++r) {
        for (std::size_t c = 0; c < tile; ++c) {
          sub.at(0, r, c) = u(ty + r, tx + c).real();
          sub.at(1, r, c) = u(ty + r, tx + c).imag();
        }
      }
      const auto tout = net_forward(net, sub);
      // pixels at least `margin` from every tile edge have their whole
      // receptive field inside the tile, so they must match the full pass
      for (std::size_t r = margin; r + margin < tile; ++r) {
        for (std::size_t c = margin; c + margin < tile; ++c) {
          const Complex expected = whole(ty + r, tx + c);
          const Complex got(tout.at(0, r, c), tout.at(1, r, c));
          REQUIRE(std::abs(got - expected) < 1e-10);
        }
      }
    }
  }
}

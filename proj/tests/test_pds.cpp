#include <catch2/catch_amalgamated.hpp>

#include "reside/pds.hpp"
#include "reside/rng.hpp"
#include "reside/wavelet.hpp"

using namespace reside;

namespace {

ComplexGrid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  ComplexGrid g(rows, cols);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = Complex(rng.normal(), rng.normal());
  return g;
}

SamplingMask random_mask(std::size_t rows, std::size_t cols, double keep_prob,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> keep(rows * cols, 0);
  for (auto& b : keep) b = rng.uniform() < keep_prob ? 1 : 0;
  keep[0] = 1;
  return SamplingMask(rows, cols, std::move(keep));
}

const Denoiser kIdentity = [](const ComplexGrid& u) { return u; };

double sampled_residual(const ForwardOperator& op, const ComplexGrid& x, const ComplexGrid& y) {
  return (apply_forward(op, x) - y).norm2();
}

}  // namespace

TEST_CASE("pds_init computes the zero-filled start") {
  const ComplexGrid truth = random_grid(16, 16, 1);
  const ForwardOperator op(SamplingMask::full(16, 16));
  const ComplexGrid y = apply_forward(op, truth);
  PdsParams params;
  const PdsState state = pds_init(op, y, params);
  REQUIRE(state.t == 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    REQUIRE(std::abs(state.x[i] - truth[i]) < 1e-12);
    REQUIRE(std::abs(state.z[i]) < 1e-12);
  }
}

TEST_CASE("pds_init of zero data is zero") {
  const ForwardOperator op(random_mask(8, 8, 0.5, 2));
  const PdsState state = pds_init(op, ComplexGrid(8, 8), PdsParams{});
  REQUIRE(state.x.norm2() == 0.0);
  REQUIRE(state.z.norm2() == 0.0);
}

TEST_CASE("dual iterate is zero off the sampling mask") {
  const ForwardOperator op(random_mask(16, 16, 0.4, 3));
  const ComplexGrid y = apply_mask(op.mask, random_grid(16, 16, 4));
  PdsParams params;
  PdsState state = pds_init(op, y, params);
  for (int t = 0; t < 10; ++t) {
    for (std::size_t i = 0; i < state.z.size(); ++i) {
      if (!op.mask.keep_at(i)) REQUIRE(std::abs(state.z[i]) == 0.0);
    }
    state = pds_step(state, op, y, params, kIdentity);
  }
}

TEST_CASE("full sampling with the identity denoiser is a fixed point") {
  const ComplexGrid truth = random_grid(12, 12, 5);
  const ForwardOperator op(SamplingMask::full(12, 12));
  const ComplexGrid y = apply_forward(op, truth);
  PdsParams params;
  PdsState state = pds_init(op, y, params);
  const ComplexGrid x0 = state.x;
  for (int t = 0; t < 50; ++t) {
    state = pds_step(state, op, y, params, kIdentity);
    for (std::size_t i = 0; i < x0.size(); ++i) REQUIRE(std::abs(state.x[i] - x0[i]) < 1e-12);
    REQUIRE(state.z.norm2() < 1e-12);
  }
  REQUIRE(state.t == 50);
}

TEST_CASE("identity-denoiser iteration drives the sampled residual to zero") {
  const ComplexGrid truth = random_grid(32, 32, 6);
  const ForwardOperator op(random_mask(32, 32, 0.5, 7));
  const ComplexGrid y = apply_forward(op, truth);
  PdsParams params;

  PdsState state = pds_init(op, y, params);
  double prev = sampled_residual(op, state.x, y);
  for (int t = 1; t <= 500; ++t) {
    state = pds_step(state, op, y, params, kIdentity);
    const double resid = sampled_residual(op, state.x, y);
    if (t > 5) REQUIRE(resid <= prev + 1e-12);
    prev = resid;
  }
  REQUIRE(prev < 1e-6);
}

TEST_CASE("one step matches a hand-evaluated trace on a 2x2 system") {
  // mask keeps DC and (1,1); y has entries only there
  std::vector<std::uint8_t> keep{1, 0, 0, 1};
  const ForwardOperator op(SamplingMask(2, 2, std::move(keep)));
  ComplexGrid y(2, 2);
  y(0, 0) = Complex(1.0, 0.5);
  y(1, 1) = Complex(-0.25, 0.75);

  PdsParams params;
  params.nu = 0.5;
  params.tau2 = 0.25;  // s = 2, gamma = 2
  const double s = params.ratio();
  const double gamma = params.gamma();
  REQUIRE(s == 2.0);
  REQUIRE(gamma == 2.0);

  // denoiser halves its input
  const Denoiser halve = [](const ComplexGrid& u) { return 0.5 * u; };

  const PdsState st0 = pds_init(op, y, params);
  const PdsState st1 = pds_step(st0, op, y, params, halve);

  // reference arithmetic, spelled out
  const ComplexGrid u = st0.x - s * apply_adjoint(op, st0.z);
  const ComplexGrid x1 = 0.5 * u;
  const ComplexGrid v = 2.0 * x1 - st0.x;
  const ComplexGrid av_minus_y = apply_forward(op, v) - y;
  for (std::size_t i = 0; i < 4; ++i) {
    const Complex zref = (gamma * st0.z[i] + av_minus_y[i]) / (1.0 + gamma);
    REQUIRE(std::abs(st1.x[i] - x1[i]) < 1e-14);
    REQUIRE(std::abs(st1.z[i] - zref) < 1e-14);
  }
  REQUIRE(st1.t == 1);
}

TEST_CASE("pds_step rejects denoisers that change the shape") {
  const ForwardOperator op(SamplingMask::full(8, 8));
  const ComplexGrid y = random_grid(8, 8, 8);
  PdsParams params;
  const PdsState state = pds_init(op, y, params);
  const Denoiser bad = [](const ComplexGrid&) { return ComplexGrid(4, 4); };
  REQUIRE_THROWS_AS(pds_step(state, op, y, params, bad), std::runtime_error);
}

TEST_CASE("pnp_reconstruct with a zero-weight wavelet prox recovers exactly") {
  const ComplexGrid truth = random_grid(16, 16, 9);
  const ForwardOperator op(SamplingMask::full(16, 16));
  const ComplexGrid y = apply_forward(op, truth);
  PdsParams params;
  params.iterations = 20;
  WaveletConfig cfg;
  cfg.levels = 2;
  cfg.lambda = 0.0;
  const Denoiser prox = [&](const ComplexGrid& u) {
    return wavelet_prox_denoise(u, cfg, params.nu);
  };
  const ComplexGrid xhat = pnp_reconstruct(op, y, params, prox);
  for (std::size_t i = 0; i < truth.size(); ++i) REQUIRE(std::abs(xhat[i] - truth[i]) < 1e-8);
}

TEST_CASE("pnp_reconstruct calls the trace exactly iterations times") {
  const ForwardOperator op(random_mask(8, 8, 0.5, 10));
  const ComplexGrid y = apply_mask(op.mask, random_grid(8, 8, 11));
  PdsParams params;
  params.iterations = 13;
  std::size_t calls = 0;
  std::size_t last_t = 0;
  pnp_reconstruct(op, y, params, kIdentity, [&](std::size_t t, const ComplexGrid& x) {
    ++calls;
    last_t = t;
    REQUIRE(x.rows() == 8);
  });
  REQUIRE(calls == 13);
  REQUIRE(last_t == 13);
}

TEST_CASE("pds_init rejects shape mismatches and bad parameters") {
  const ForwardOperator op(SamplingMask::full(8, 8));
  REQUIRE_THROWS_AS(pds_init(op, ComplexGrid(4, 4), PdsParams{}), std::invalid_argument);
  PdsParams bad;
  bad.nu = 0.0;
  REQUIRE_THROWS_AS(pds_init(op, ComplexGrid(8, 8), bad), std::invalid_argument);
}

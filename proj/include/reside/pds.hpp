#pragma once

// Plug-and-play primal-dual splitting. The denoiser is an opaque
// image-to-image function; the driver only runs the split updates
//
//   u = x - s A^H z,   x' = f(u),   v = 2x' - x,
//   z' = (gamma z + (A v - y)) / (1 + gamma),    gamma = s ||A||^2
//
// with s = nu / tau^2. The dual iterate z lives in k-space and stays zero at
// unsampled locations.

#include <functional>
#include <stdexcept>

#include "reside/grid.hpp"
#include "reside/operators.hpp"

namespace reside {

struct PdsParams {
  double nu = 1.0;    // prox scale, > 0
  double tau2 = 1.0;  // measurement noise variance, > 0
  std::size_t iterations = 70;
  double norm_a = 1.0;  // ||A||_2; 1 for the masked unitary FFT

  double ratio() const { return nu / tau2; }      // s = nu / tau^2
  double gamma() const { return ratio() * norm_a * norm_a; }

  void validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("PdsParams: nu must be > 0");
    if (!(tau2 > 0.0)) throw std::invalid_argument("PdsParams: tau2 must be > 0");
    if (!(gamma() > 0.0)) throw std::invalid_argument("PdsParams: gamma must be > 0");
  }
};

struct PdsState {
  ComplexGrid x;  // primal iterate, image domain
  ComplexGrid z;  // dual iterate, k-space domain, zero off-mask
  std::size_t t = 0;
};

using Denoiser = std::function<ComplexGrid(const ComplexGrid&)>;

// x0 = A^H y, z0 = A x0 - y. The measured data is masked on entry so the
// off-mask-zero invariant on z holds regardless of the caller's y.
inline PdsState pds_init(const ForwardOperator& op, const ComplexGrid& y,
                         const PdsParams& params) {
  params.validate();
  if (y.rows() != op.rows() || y.cols() != op.cols())
    throw std::invalid_argument("pds_init: shape mismatch");
  PdsState state;
  const ComplexGrid y_masked = apply_mask(op.mask, y);
  state.x = apply_adjoint(op, y_masked);
  state.z = apply_forward(op, state.x) - y_masked;
  state.t = 0;
  return state;
}

inline PdsState pds_step(const PdsState& state, const ForwardOperator& op, const ComplexGrid& y,
                         const PdsParams& params, const Denoiser& denoiser) {
  const double s = params.ratio();
  const double gamma = params.gamma();

  ComplexGrid u = state.x - s * apply_adjoint(op, state.z);
  ComplexGrid x_next = denoiser(u);
  if (!x_next.same_shape(state.x))
    throw std::runtime_error("pds_step: denoiser changed the grid shape");

  ComplexGrid v = 2.0 * x_next - state.x;
  ComplexGrid data_resid = apply_forward(op, v) - apply_mask(op.mask, y);

  PdsState next;
  next.x = std::move(x_next);
  next.z = ComplexGrid(state.z.rows(), state.z.cols());
  const double w_old = gamma / (1.0 + gamma);
  const double w_new = 1.0 / (1.0 + gamma);
  for (std::size_t i = 0; i < next.z.size(); ++i) {
    next.z[i] = w_old * state.z[i] + w_new * data_resid[i];
  }
  next.t = state.t + 1;
  return next;
}

// Runs pds_init then `iterations` steps; `trace` (if set) observes every
// iterate right after its dual update.
inline ComplexGrid pnp_reconstruct(
    const ForwardOperator& op, const ComplexGrid& y, const PdsParams& params,
    const Denoiser& denoiser,
    const std::function<void(std::size_t, const ComplexGrid&)>& trace = nullptr) {
  if (params.iterations < 1) throw std::invalid_argument("pnp_reconstruct: iterations must be >= 1");
  PdsState state = pds_init(op, y, params);
  for (std::size_t t = 1; t <= params.iterations; ++t) {
    state = pds_step(state, op, y, params, denoiser);
    if (trace) trace(t, state.x);
  }
  return state.x;
}

}  // namespace reside

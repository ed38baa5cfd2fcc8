#pragma once

// Adam with bias correction over flat parameter/gradient buffers.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace reside {

template <typename T>
struct AdamState {
  std::vector<T> m;  // first moment
  std::vector<T> v;  // second moment, entries >= 0
  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n, double learning_rate = 1e-3)
      : m(n, T(0)), v(n, T(0)), lr(learning_rate) {}
};

template <typename T>
void adam_step(std::vector<T>& params, const std::vector<T>& grads, AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T one_minus_b1 = static_cast<T>(1.0 - state.beta1);
  const T one_minus_b2 = static_cast<T>(1.0 - state.beta2);
  const T inv_bc1 = static_cast<T>(1.0 / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  const T lr = static_cast<T>(state.lr);
  const T eps = static_cast<T>(state.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + one_minus_b1 * g;
    state.v[i] = b2 * state.v[i] + one_minus_b2 * g * g;
    const T mhat = state.m[i] * inv_bc1;
    const T vhat = state.v[i] * inv_bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace reside

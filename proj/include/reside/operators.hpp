#pragma once

// Forward operator A = M∘F: unitary 2-D FFT followed by k-space subsampling.
// Unsampled entries are represented as exact zeros in a full-size grid, so
// every domain and range object is a ComplexGrid of the same shape.

#include <cstdint>
#include <stdexcept>

#include "reside/fft.hpp"
#include "reside/grid.hpp"
#include "reside/rng.hpp"

namespace reside {

struct ForwardOperator {
  SamplingMask mask;

  explicit ForwardOperator(SamplingMask m) : mask(std::move(m)) {}

  std::size_t rows() const { return mask.rows(); }
  std::size_t cols() const { return mask.cols(); }
};

inline ComplexGrid apply_mask(const SamplingMask& mask, const ComplexGrid& g) {
  if (g.rows() != mask.rows() || g.cols() != mask.cols())
    throw std::invalid_argument("apply_mask: shape mismatch");
  ComplexGrid out = g;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.keep_at(i)) out[i] = Complex(0.0, 0.0);
  }
  return out;
}

// y = M F x. Unsampled entries of the result are exactly zero.
inline ComplexGrid apply_forward(const ForwardOperator& op, const ComplexGrid& x) {
  if (x.rows() != op.rows() || x.cols() != op.cols())
    throw std::invalid_argument("apply_forward: shape mismatch");
  return apply_mask(op.mask, fft2(x));
}

// x = F^H M y. Masking the input first makes the adjoint total: callers may
// pass k-space with junk at unsampled locations and still get A^H(M y).
inline ComplexGrid apply_adjoint(const ForwardOperator& op, const ComplexGrid& y) {
  if (y.rows() != op.rows() || y.cols() != op.cols())
    throw std::invalid_argument("apply_adjoint: shape mismatch");
  return ifft2(apply_mask(op.mask, y));
}

// Power iteration on A^H A. For a row-subsampled unitary the singular values
// are 0 or 1, so this converges to 1 after a couple of iterations; it exists
// so step-size choices never have to assume the operator is normalized.
inline double operator_norm(const ForwardOperator& op, std::size_t iterations,
                            std::uint64_t seed) {
  if (iterations < 1) throw std::invalid_argument("operator_norm: iterations < 1");
  if (op.mask.sample_count() == 0) throw std::invalid_argument("operator_norm: empty mask");

  Rng rng(derive_seed(seed, 0, Stream::power_iter));
  ComplexGrid b(op.rows(), op.cols());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = Complex(rng.normal(), rng.normal());

  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const ComplexGrid ab = apply_forward(op, b);
    const double nb = b.norm2();
    if (nb == 0.0) throw std::invalid_argument("operator_norm: zero start vector");
    estimate = ab.norm2() / nb;
    b = apply_adjoint(op, ab);
  }
  return estimate;
}

}  // namespace reside

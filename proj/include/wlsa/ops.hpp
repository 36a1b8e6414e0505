#pragma once

#include <cstddef>

#include "wlsa/graph.hpp"

// Differentiable ops over Graph nodes. Broadcasting is limited to
// scalar-vs-tensor for the binary arithmetic ops; bias and per-row scaling
// have their own explicit ops.
namespace wlsa::grad {

inline constexpr double kSqrtEps = 1e-6;
inline constexpr double kNormEps = 1e-6;

Var matmul(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);

/// a[m×n] + b[n] on every row.
Var add_row(Var a, Var b);
/// a[m×n] scaled per row by c[m×1] (or c[m]).
Var mul_col(Var a, Var c);

Var scale(Var a, double s);
Var add_scalar(Var a, double s);

Var neg(Var a);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
/// sqrt(max(a, eps)); gradient is zero where the clamp is active.
Var sqrt(Var a, double eps = kSqrtEps);
/// Subgradient 0 at 0.
Var abs(Var a);
Var exp(Var a);
Var square(Var a);

Var sum(Var a);
Var mean(Var a);
/// Sum of a rank-2 tensor along `axis`; keeps rank 2 (1×n for axis 0, m×1 for axis 1).
Var sum_axis(Var a, int axis);

/// Max-subtracted softmax of a rank-2 tensor along `axis`.
Var softmax(Var a, int axis);

/// Per-row normalisation to zero mean / unit variance, then gain ⊙ x̂ + bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = kNormEps);

Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t begin, std::size_t end);

/// x[m×in] · w[in×out] + b[out].
Var linear(Var x, Var w, Var b);

/// Row norms sqrt(Σ x² + eps) of a rank-2 tensor, shape m×1.
Var row_norms(Var x, double eps = kNormEps);

struct GruWeights {
  Var w_xz, w_hz, b_z;
  Var w_xr, w_hr, b_r;
  Var w_xh, w_hh, b_h;
};

/// Standard GRU cell:
///   z = σ(x·Wxz + h·Whz + bz),  r = σ(x·Wxr + h·Whr + br)
///   h̃ = tanh(x·Wxh + (r ⊙ h)·Whh + bh),  h' = (1 − z) ⊙ h + z ⊙ h̃
Var gru_cell(Var input, Var hidden, const GruWeights& w);

}  // namespace wlsa::grad

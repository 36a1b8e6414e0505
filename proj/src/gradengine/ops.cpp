#include "wlsa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wlsa/errors.hpp"

namespace wlsa::grad {
namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " + shape_string(t.shape()));
  }
}

void require_same_graph(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw ContractError("operands live in different graphs");
}

// a += b elementwise
void accumulate(Tensor& a, const Tensor& b) {
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) ad[i] += bd[i];
}

// C[m×n] += A[m×k] · B[k×n]
void gemm_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = C + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
  }
}

// C[m×n] += A[m×k] · B[n×k]ᵀ
void gemm_abt_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += A[i * k + p] * B[j * k + p];
      C[i * n + j] += s;
    }
  }
}

// C[k×n] += A[m×k]ᵀ · B[m×n]
void gemm_atb_acc(const double* A, const double* B, double* C, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double a = A[i * k + p];
      if (a == 0.0) continue;
      const double* brow = B + i * n;
      double* crow = C + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
  }
}

enum class Bcast { kSame, kScalarA, kScalarB };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::kSame;
  if (b.size() == 1) return Bcast::kScalarB;
  if (a.size() == 1) return Bcast::kScalarA;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                       shape_string(b.shape()));
}

template <class Fwd, class Da, class Db>
Var binary(Var a, Var b, const char* name, Fwd fwd, Da da, Db db) {
  require_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Bcast kind = broadcast_kind(av, bv, name);
  const Shape& out_shape = kind == Bcast::kScalarA ? bv.shape() : av.shape();
  Tensor out(out_shape);
  const std::size_t n = out.size();
  auto a_at = [kind](const Tensor& t, std::size_t i) { return kind == Bcast::kScalarA ? t[0] : t[i]; };
  auto b_at = [kind](const Tensor& t, std::size_t i) { return kind == Bcast::kScalarB ? t[0] : t[i]; };
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(a_at(av, i), b_at(bv, i));
  return a.graph().record(std::move(out), {a, b}, [=](const BackwardContext& ctx) {
    const Tensor& x = *ctx.in_values[0];
    const Tensor& y = *ctx.in_values[1];
    const Tensor& g = ctx.out_grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double xi = a_at(x, i);
      const double yi = b_at(y, i);
      if (Tensor* ga = ctx.in_grads[0]) (kind == Bcast::kScalarA ? (*ga)[0] : (*ga)[i]) += g[i] * da(xi, yi);
      if (Tensor* gb = ctx.in_grads[1]) (kind == Bcast::kScalarB ? (*gb)[0] : (*gb)[i]) += g[i] * db(xi, yi);
    }
  });
}

// Elementwise unary op; `deriv(x, y)` gets the input and output value.
template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  return a.graph().record(std::move(out), {a}, [=](const BackwardContext& ctx) {
    Tensor* ga = ctx.in_grads[0];
    const Tensor& x = *ctx.in_values[0];
    for (std::size_t i = 0; i < x.size(); ++i) (*ga)[i] += ctx.out_grad[i] * deriv(x[i], ctx.out_value[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(av.shape()) + " · " +
                         shape_string(bv.shape()));
  }
  Tensor out({m, n});
  gemm_acc(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  return a.graph().record(std::move(out), {a, b}, [m, k, n](const BackwardContext& ctx) {
    const double* g = ctx.out_grad.data().data();
    if (Tensor* ga = ctx.in_grads[0]) gemm_abt_acc(g, ctx.in_values[1]->data().data(), ga->data().data(), m, n, k);
    if (Tensor* gb = ctx.in_grads[1]) gemm_atb_acc(ctx.in_values[0]->data().data(), g, gb->data().data(), m, k, n);
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = av.at(i, j);
  return a.graph().record(std::move(out), {a}, [m, n](const BackwardContext& ctx) {
    Tensor& ga = *ctx.in_grads[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) += ctx.out_grad.at(j, i);
  });
}

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var div(Var a, Var b) {
  if (a.graph().check_finite()) {
    for (double v : b.value().data()) {
      if (std::abs(v) < 1e-12) throw ContractError("div: divisor below 1e-12 without a guard");
    }
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Var add_row(Var a, Var b) {
  require_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "add_row");
  const std::size_t m = av.rows(), n = av.cols();
  if (bv.size() != n) {
    throw DimensionError("add_row: bias of size " + std::to_string(bv.size()) + " for " + std::to_string(n) +
                         " columns");
  }
  Tensor out = av;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) += bv[j];
  return a.graph().record(std::move(out), {a, b}, [m, n](const BackwardContext& ctx) {
    if (Tensor* ga = ctx.in_grads[0]) accumulate(*ga, ctx.out_grad);
    if (Tensor* gb = ctx.in_grads[1]) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += ctx.out_grad.at(i, j);
    }
  });
}

Var mul_col(Var a, Var c) {
  require_same_graph(a, c);
  const Tensor& av = a.value();
  const Tensor& cv = c.value();
  require_rank2(av, "mul_col");
  const std::size_t m = av.rows(), n = av.cols();
  if (cv.size() != m) {
    throw DimensionError("mul_col: column of size " + std::to_string(cv.size()) + " for " + std::to_string(m) +
                         " rows");
  }
  Tensor out = av;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) *= cv[i];
  return a.graph().record(std::move(out), {a, c}, [m, n](const BackwardContext& ctx) {
    const Tensor& x = *ctx.in_values[0];
    const Tensor& s = *ctx.in_values[1];
    const Tensor& g = ctx.out_grad;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (Tensor* ga = ctx.in_grads[0]) ga->at(i, j) += g.at(i, j) * s[i];
        if (Tensor* gc = ctx.in_grads[1]) (*gc)[i] += g.at(i, j) * x.at(i, j);
      }
    }
  });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var neg(Var a) {
  return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

Var sqrt(Var a, double eps) {
  return unary(
      a, [eps](double x) { return std::sqrt(std::max(x, eps)); },
      [eps](double x, double y) { return x >= eps ? 0.5 / y : 0.0; });
}

Var abs(Var a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var square(Var a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return a.graph().record(Tensor::scalar(s), {a}, [](const BackwardContext& ctx) {
    const double g = ctx.out_grad[0];
    for (double& v : ctx.in_grads[0]->data()) v += g;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var sum_axis(Var a, int axis) {
  const Tensor& av = a.value();
  require_rank2(av, "sum_axis");
  if (axis != 0 && axis != 1) throw DimensionError("sum_axis: axis must be 0 or 1");
  const std::size_t m = av.rows(), n = av.cols();
  Tensor out(axis == 0 ? Shape{1, n} : Shape{m, 1});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : i] += av.at(i, j);
  return a.graph().record(std::move(out), {a}, [m, n, axis](const BackwardContext& ctx) {
    Tensor& ga = *ctx.in_grads[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) += ctx.out_grad[axis == 0 ? j : i];
  });
}

Var softmax(Var a, int axis) {
  const Tensor& av = a.value();
  require_rank2(av, "softmax");
  if (axis != 0 && axis != 1) throw DimensionError("softmax: axis must be 0 or 1");
  const std::size_t m = av.rows(), n = av.cols();
  // Iterate over "lanes": columns when axis == 0, rows when axis == 1.
  const std::size_t lanes = axis == 0 ? n : m;
  const std::size_t len = axis == 0 ? m : n;
  auto idx = [=](std::size_t lane, std::size_t e) { return axis == 0 ? e * n + lane : lane * n + e; };
  Tensor out(av.shape());
  for (std::size_t l = 0; l < lanes; ++l) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < len; ++e) mx = std::max(mx, av[idx(l, e)]);
    double z = 0.0;
    for (std::size_t e = 0; e < len; ++e) {
      const double v = std::exp(av[idx(l, e)] - mx);
      out[idx(l, e)] = v;
      z += v;
    }
    for (std::size_t e = 0; e < len; ++e) out[idx(l, e)] /= z;
  }
  return a.graph().record(std::move(out), {a}, [=](const BackwardContext& ctx) {
    Tensor& ga = *ctx.in_grads[0];
    const Tensor& y = ctx.out_value;
    const Tensor& g = ctx.out_grad;
    for (std::size_t l = 0; l < lanes; ++l) {
      double dot = 0.0;
      for (std::size_t e = 0; e < len; ++e) dot += g[idx(l, e)] * y[idx(l, e)];
      for (std::size_t e = 0; e < len; ++e) ga[idx(l, e)] += y[idx(l, e)] * (g[idx(l, e)] - dot);
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_same_graph(x, gain);
  require_same_graph(x, bias);
  const Tensor& xv = x.value();
  require_rank2(xv, "layer_norm");
  const std::size_t m = xv.rows(), d = xv.cols();
  if (d == 0) throw DimensionError("layer_norm: empty rows");
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm: gain/bias must have " + std::to_string(d) + " entries");
  }
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xv.at(i, j);
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xv.at(i, j) - mu) * (xv.at(i, j) - mu);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) xhat.at(i, j) = (xv.at(i, j) - mu) * inv_std[i];
  }
  Tensor out(xv.shape());
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = gv[j] * xhat.at(i, j) + bv[j];

  return x.graph().record(std::move(out), {x, gain, bias},
                          [m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](const BackwardContext& ctx) {
                            const Tensor& g = ctx.out_grad;
                            const Tensor& gv = *ctx.in_values[1];
                            if (Tensor* gg = ctx.in_grads[1]) {
                              for (std::size_t i = 0; i < m; ++i)
                                for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g.at(i, j) * xhat.at(i, j);
                            }
                            if (Tensor* gb = ctx.in_grads[2]) {
                              for (std::size_t i = 0; i < m; ++i)
                                for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g.at(i, j);
                            }
                            if (Tensor* gx = ctx.in_grads[0]) {
                              const double dd = static_cast<double>(d);
                              for (std::size_t i = 0; i < m; ++i) {
                                double s1 = 0.0, s2 = 0.0;
                                for (std::size_t j = 0; j < d; ++j) {
                                  const double gh = g.at(i, j) * gv[j];
                                  s1 += gh;
                                  s2 += gh * xhat.at(i, j);
                                }
                                for (std::size_t j = 0; j < d; ++j) {
                                  const double gh = g.at(i, j) * gv[j];
                                  gx->at(i, j) += inv_std[i] * (gh - s1 / dd - xhat.at(i, j) * s2 / dd);
                                }
                              }
                            }
                          });
}

Var concat_cols(Var a, Var b) {
  require_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "concat_cols");
  require_rank2(bv, "concat_cols");
  const std::size_t m = av.rows(), na = av.cols(), nb = bv.cols();
  if (bv.rows() != m) throw DimensionError("concat_cols: row counts differ");
  Tensor out({m, na + nb});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < na; ++j) out.at(i, j) = av.at(i, j);
    for (std::size_t j = 0; j < nb; ++j) out.at(i, na + j) = bv.at(i, j);
  }
  return a.graph().record(std::move(out), {a, b}, [m, na, nb](const BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad;
    for (std::size_t i = 0; i < m; ++i) {
      if (Tensor* ga = ctx.in_grads[0])
        for (std::size_t j = 0; j < na; ++j) ga->at(i, j) += g.at(i, j);
      if (Tensor* gb = ctx.in_grads[1])
        for (std::size_t j = 0; j < nb; ++j) gb->at(i, j) += g.at(i, na + j);
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  require_rank2(av, "slice_cols");
  const std::size_t m = av.rows(), n = av.cols();
  if (begin >= end || end > n) throw DimensionError("slice_cols: bad column range");
  const std::size_t w = end - begin;
  Tensor out({m, w});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out.at(i, j) = av.at(i, begin + j);
  return a.graph().record(std::move(out), {a}, [m, w, begin](const BackwardContext& ctx) {
    Tensor& ga = *ctx.in_grads[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) ga.at(i, begin + j) += ctx.out_grad.at(i, j);
  });
}

Var linear(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

Var row_norms(Var x, double eps) { return sqrt(add_scalar(sum_axis(square(x), 1), eps), 0.0); }

Var gru_cell(Var input, Var hidden, const GruWeights& w) {
  const Tensor& xv = input.value();
  const Tensor& hv = hidden.value();
  require_rank2(xv, "gru_cell");
  require_rank2(hv, "gru_cell");
  if (xv.rows() != hv.rows()) throw DimensionError("gru_cell: batch sizes of input and hidden differ");
  const Var z = sigmoid(add_row(add(matmul(input, w.w_xz), matmul(hidden, w.w_hz)), w.b_z));
  const Var r = sigmoid(add_row(add(matmul(input, w.w_xr), matmul(hidden, w.w_hr)), w.b_r));
  const Var cand = tanh(add_row(add(matmul(input, w.w_xh), matmul(mul(r, hidden), w.w_hh)), w.b_h));
  // (1 - z) ⊙ h + z ⊙ h̃  ==  h + z ⊙ (h̃ - h)
  return add(hidden, mul(z, sub(cand, hidden)));
}

}  // namespace wlsa::grad

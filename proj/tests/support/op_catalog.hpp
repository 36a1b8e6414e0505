#pragma once

// Every differentiable op with a random-input generator that keeps samples
// away from kinks (ReLU/abs at 0, clamp boundaries, cone switches).

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fd.hpp"
#include "wlsa/attention_ops.hpp"
#include "wlsa/ops.hpp"

namespace wlsa::testing {

struct OpCase {
  std::string name;
  std::function<std::vector<Tensor>(Rng&)> inputs;
  OpFn op;
};

inline Tensor away_from_zero(Rng& rng, Shape shape, double margin = 0.05) {
  Tensor t(std::move(shape));
  for (double& v : t.storage()) v = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(margin, 1.0);
  return t;
}

namespace detail {

inline kernels::LorentzLogitParams lorentz_params() { return {}; }

// Pairs whose τ, q, r or r − |τ| sit near zero make the logit non-smooth.
inline bool lorentz_smooth(const Tensor& f, const Tensor& s, double margin) {
  for (std::size_t k = 0; k < s.rows(); ++k) {
    for (std::size_t n = 0; n < f.rows(); ++n) {
      const double tau = f.at(n, 0) - s.at(k, 0);
      double sp = 0.0;
      for (std::size_t i = 1; i < f.cols(); ++i) sp += (f.at(n, i) - s.at(k, i)) * (f.at(n, i) - s.at(k, i));
      const double r = std::sqrt(sp);
      if (std::abs(tau) < margin || r < margin || std::abs(r - std::abs(tau)) < margin) return false;
    }
  }
  return true;
}

inline bool poincare_smooth(const Tensor& f, const Tensor& s, const std::vector<double>& radius, double margin) {
  for (std::size_t k = 0; k < s.rows(); ++k) {
    for (std::size_t n = 0; n < f.rows(); ++n) {
      double nf = 0.0, d = 0.0;
      for (std::size_t i = 0; i < f.cols(); ++i) {
        nf += f.at(n, i) * f.at(n, i);
        d += (f.at(n, i) - s.at(k, i)) * (f.at(n, i) - s.at(k, i));
      }
      if (std::abs(std::sqrt(nf) - radius[k]) < margin || std::sqrt(d) < margin) return false;
    }
  }
  return true;
}

inline Tensor ball_points(Rng& rng, std::size_t rows, std::size_t cols, double max_norm) {
  Tensor t({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      t.at(r, c) = rng.normal(0.0, 1.0);
      n2 += t.at(r, c) * t.at(r, c);
    }
    const double target = rng.uniform(0.05, max_norm) / std::sqrt(n2);
    for (std::size_t c = 0; c < cols; ++c) t.at(r, c) *= target;
  }
  return t;
}

inline const std::vector<double>& poincare_radii() {
  static const std::vector<double> r{0.2, 0.5, 0.8, 0.2};
  return r;
}

}  // namespace detail

inline std::vector<OpCase> op_catalog() {
  using grad::Var;
  using Vars = std::span<const Var>;
  auto rt = [](Shape s) { return [s](Rng& rng) { return std::vector<Tensor>{random_tensor(rng, s)}; }; };
  auto rt2 = [](Shape a, Shape b) {
    return [a, b](Rng& rng) { return std::vector<Tensor>{random_tensor(rng, a), random_tensor(rng, b)}; };
  };

  std::vector<OpCase> ops;
  ops.push_back({"matmul", rt2({3, 4}, {4, 2}), [](grad::Graph&, Vars v) { return grad::matmul(v[0], v[1]); }});
  ops.push_back({"transpose", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::transpose(v[0]); }});
  ops.push_back({"add", rt2({3, 4}, {3, 4}), [](grad::Graph&, Vars v) { return grad::add(v[0], v[1]); }});
  ops.push_back({"add_scalar_broadcast", rt2({3, 4}, {1}), [](grad::Graph&, Vars v) { return grad::add(v[0], v[1]); }});
  ops.push_back({"sub", rt2({3, 4}, {3, 4}), [](grad::Graph&, Vars v) { return grad::sub(v[0], v[1]); }});
  ops.push_back({"mul", rt2({3, 4}, {3, 4}), [](grad::Graph&, Vars v) { return grad::mul(v[0], v[1]); }});
  ops.push_back({"mul_scalar_broadcast", rt2({1}, {3, 4}), [](grad::Graph&, Vars v) { return grad::mul(v[0], v[1]); }});
  ops.push_back({"div",
                 [](Rng& rng) {
                   Tensor den = away_from_zero(rng, {3, 4});
                   for (double& d : den.storage()) d = std::copysign(0.5 + std::abs(d), d);
                   return std::vector<Tensor>{random_tensor(rng, {3, 4}), den};
                 },
                 [](grad::Graph&, Vars v) { return grad::div(v[0], v[1]); }});
  ops.push_back({"add_row", rt2({3, 4}, {4}), [](grad::Graph&, Vars v) { return grad::add_row(v[0], v[1]); }});
  ops.push_back({"mul_col", rt2({3, 4}, {3, 1}), [](grad::Graph&, Vars v) { return grad::mul_col(v[0], v[1]); }});
  ops.push_back({"scale", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::scale(v[0], -1.7); }});
  ops.push_back({"add_scalar", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::add_scalar(v[0], 0.3); }});
  ops.push_back({"neg", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::neg(v[0]); }});
  ops.push_back({"relu", [](Rng& rng) { return std::vector<Tensor>{away_from_zero(rng, {3, 4})}; },
                 [](grad::Graph&, Vars v) { return grad::relu(v[0]); }});
  ops.push_back({"tanh", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::tanh(v[0]); }});
  ops.push_back({"sigmoid", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::sigmoid(v[0]); }});
  ops.push_back({"sqrt", [](Rng& rng) { return std::vector<Tensor>{random_tensor(rng, {3, 4}, 0.2, 2.0)}; },
                 [](grad::Graph&, Vars v) { return grad::sqrt(v[0]); }});
  ops.push_back({"abs", [](Rng& rng) { return std::vector<Tensor>{away_from_zero(rng, {3, 4})}; },
                 [](grad::Graph&, Vars v) { return grad::abs(v[0]); }});
  ops.push_back({"exp", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::exp(v[0]); }});
  ops.push_back({"square", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::square(v[0]); }});
  ops.push_back({"sum", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::sum(v[0]); }});
  ops.push_back({"mean", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::mean(v[0]); }});
  ops.push_back({"sum_axis0", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::sum_axis(v[0], 0); }});
  ops.push_back({"sum_axis1", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::sum_axis(v[0], 1); }});
  ops.push_back({"softmax_axis0", rt({4, 3}), [](grad::Graph&, Vars v) { return grad::softmax(v[0], 0); }});
  ops.push_back({"softmax_axis1", rt({4, 3}), [](grad::Graph&, Vars v) { return grad::softmax(v[0], 1); }});
  ops.push_back({"layer_norm",
                 [](Rng& rng) {
                   return std::vector<Tensor>{random_tensor(rng, {3, 5}), random_tensor(rng, {5}),
                                              random_tensor(rng, {5})};
                 },
                 [](grad::Graph&, Vars v) { return grad::layer_norm(v[0], v[1], v[2]); }});
  ops.push_back({"concat_cols", rt2({3, 2}, {3, 3}), [](grad::Graph&, Vars v) { return grad::concat_cols(v[0], v[1]); }});
  ops.push_back({"slice_cols", rt({3, 5}), [](grad::Graph&, Vars v) { return grad::slice_cols(v[0], 1, 4); }});
  ops.push_back({"linear",
                 [](Rng& rng) {
                   return std::vector<Tensor>{random_tensor(rng, {3, 4}), random_tensor(rng, {4, 2}),
                                              random_tensor(rng, {2})};
                 },
                 [](grad::Graph&, Vars v) { return grad::linear(v[0], v[1], v[2]); }});
  ops.push_back({"row_norms", rt({3, 4}), [](grad::Graph&, Vars v) { return grad::row_norms(v[0]); }});
  ops.push_back({"gru_cell",
                 [](Rng& rng) {
                   std::vector<Tensor> in{random_tensor(rng, {2, 3}), random_tensor(rng, {2, 3})};
                   for (int gate = 0; gate < 3; ++gate) {
                     in.push_back(random_tensor(rng, {3, 3}));
                     in.push_back(random_tensor(rng, {3, 3}));
                     in.push_back(random_tensor(rng, {3}));
                   }
                   return in;
                 },
                 [](grad::Graph&, Vars v) {
                   return grad::gru_cell(v[0], v[1], {v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]});
                 }});
  ops.push_back({"lorentz_logits",
                 [](Rng& rng) {
                   for (;;) {
                     Tensor f = random_tensor(rng, {5, 4}, -1.5, 1.5);
                     Tensor s = random_tensor(rng, {3, 4}, -1.5, 1.5);
                     if (detail::lorentz_smooth(f, s, 0.05)) return std::vector<Tensor>{f, s};
                   }
                 },
                 [](grad::Graph&, Vars v) {
                   Tensor h({3, 5});
                   for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.3 + 0.1 * static_cast<double>(i % 7);
                   return grad::lorentz_logits(v[0], v[1], h, detail::lorentz_params(), grad::KernelRoute::kSerial);
                 }});
  ops.push_back({"euclid_logits", rt2({5, 4}, {3, 4}), [](grad::Graph&, Vars v) {
                   return grad::euclid_logits(v[0], v[1], {}, grad::KernelRoute::kSerial);
                 }});
  ops.push_back({"poincare_logits",
                 [](Rng& rng) {
                   for (;;) {
                     Tensor f = detail::ball_points(rng, 5, 3, 0.85);
                     Tensor s = detail::ball_points(rng, 4, 3, 0.85);
                     if (detail::poincare_smooth(f, s, detail::poincare_radii(), 0.05)) return std::vector<Tensor>{f, s};
                   }
                 },
                 [](grad::Graph&, Vars v) {
                   return grad::poincare_logits(v[0], v[1], detail::poincare_radii(), {}, grad::KernelRoute::kSerial);
                 }});
  return ops;
}

}  // namespace wlsa::testing

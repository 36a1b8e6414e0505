#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "support/fd.hpp"
#include "support/op_catalog.hpp"
#include "wlsa/errors.hpp"
#include "wlsa/ops.hpp"

namespace wlsa {
namespace {

using grad::Graph;
using grad::Var;

TEST(Tensor, ShapeAndDataMustAgree) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  const Tensor t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_DOUBLE_EQ(t.at(1, 2), 6.0);
}

TEST(Ops, MatmulExamples) {
  Graph g;
  const Var eye = g.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  EXPECT_EQ(grad::matmul(eye, eye).value().storage(), eye.value().storage());

  const Var a = g.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  const Var b = g.constant(Tensor::matrix({{1}, {1}}));
  const Tensor c = grad::matmul(a, b).value();
  EXPECT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_DOUBLE_EQ(c[0], 3.0);
  EXPECT_DOUBLE_EQ(c[1], 7.0);
}

TEST(Ops, ShapeMismatchThrowsDimensionError) {
  Graph g;
  const Var a = g.constant(Tensor({2, 3}));
  const Var b = g.constant(Tensor({2, 3}));
  EXPECT_THROW(grad::matmul(a, b), DimensionError);
  EXPECT_THROW(grad::add(a, g.constant(Tensor({3, 2}))), DimensionError);
  EXPECT_THROW(grad::add_row(a, g.constant(Tensor({2}))), DimensionError);
}

TEST(Ops, ElementwiseExamples) {
  Graph g;
  EXPECT_DOUBLE_EQ(grad::relu(g.constant(Tensor::scalar(-3.0))).value().item(), 0.0);
  EXPECT_DOUBLE_EQ(grad::tanh(g.constant(Tensor::scalar(0.0))).value().item(), 0.0);
  EXPECT_DOUBLE_EQ(grad::sigmoid(g.constant(Tensor::scalar(0.0))).value().item(), 0.5);
}

TEST(Ops, SoftmaxOfZerosIsUniform) {
  Graph g;
  const Tensor s = grad::softmax(g.constant(Tensor::matrix({{0, 0, 0}})), 1).value();
  for (double v : s.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Ops, SoftmaxSumsToOne) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Graph g;
    const Tensor logits = testing::random_tensor(rng, {6, 9}, -50.0, 50.0);
    const Tensor cols = grad::softmax(g.constant(logits), 0).value();
    for (std::size_t c = 0; c < 9; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < 6; ++r) s += cols.at(r, c);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
    const Tensor rows = grad::softmax(g.constant(logits), 1).value();
    for (std::size_t r = 0; r < 6; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 9; ++c) s += rows.at(r, c);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Ops, LayerNormExamples) {
  Graph g;
  const Var gain = g.constant(Tensor({3}, 1.0));
  const Var bias = g.constant(Tensor({3}, 0.0));
  const Tensor flat = grad::layer_norm(g.constant(Tensor::matrix({{2, 2, 2}})), gain, bias).value();
  for (double v : flat.data()) EXPECT_DOUBLE_EQ(v, 0.0);

  const Tensor y = grad::layer_norm(g.constant(Tensor::matrix({{1, 2, 3}})), gain, bias).value();
  const double mean = (y[0] + y[1] + y[2]) / 3.0;
  const double var = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0 - mean * mean;
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-5);  // ε = 1e-6 against variance 2/3
}

TEST(Ops, GruWithZeroWeightsHalvesHidden) {
  Graph g;
  const Var zero_w = g.constant(Tensor({3, 3}));
  const Var zero_b = g.constant(Tensor({3}));
  const grad::GruWeights w{zero_w, zero_w, zero_b, zero_w, zero_w, zero_b, zero_w, zero_w, zero_b};
  const Tensor h = Tensor::matrix({{1.0, -2.0, 0.5}, {3.0, 0.0, -1.0}});
  const Tensor out = grad::gru_cell(g.constant(Tensor::matrix({{4, 5, 6}, {7, 8, 9}})), g.constant(h), w).value();
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_DOUBLE_EQ(out[i], 0.5 * h[i]);
}

TEST(Ops, GruUpdateGateSaturation) {
  Rng rng(3);
  Graph g;
  auto rnd = [&](Shape s) { return g.constant(testing::random_tensor(rng, std::move(s))); };
  const Var x = rnd({2, 3});
  const Var h = rnd({2, 3});
  const Var wxz = rnd({3, 3}), whz = rnd({3, 3}), wxr = rnd({3, 3}), whr = rnd({3, 3}), br = rnd({3});
  const Var wxh = rnd({3, 3}), whh = rnd({3, 3}), bh = rnd({3});

  // z → 0 keeps the hidden state.
  const Tensor keep =
      grad::gru_cell(x, h, {wxz, whz, g.constant(Tensor({3}, -60.0)), wxr, whr, br, wxh, whh, bh}).value();
  for (std::size_t i = 0; i < keep.size(); ++i) EXPECT_NEAR(keep[i], h.value()[i], 1e-12);

  // z → 1 replaces it with the candidate tanh(...), which is bounded by 1.
  const Tensor replace =
      grad::gru_cell(x, h, {wxz, whz, g.constant(Tensor({3}, 60.0)), wxr, whr, br, wxh, whh, bh}).value();
  for (double v : replace.data()) EXPECT_LT(std::abs(v), 1.0);
}

TEST(Backward, SumGivesOnes) {
  Graph g;
  const Var p = g.parameter(Tensor::matrix({{1, -2}, {3, 4}}));
  g.backward(grad::sum(p));
  for (double v : p.grad().data()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Backward, HalfSquaredNormGivesInput) {
  Graph g;
  const Tensor value = Tensor::vector({0.5, -1.5, 2.0});
  const Var p = g.parameter(value);
  g.backward(grad::scale(grad::sum(grad::mul(p, p)), 0.5));
  for (std::size_t i = 0; i < value.size(); ++i) EXPECT_DOUBLE_EQ(p.grad()[i], value[i]);
}

TEST(Backward, UnreachableParameterHasZeroGradient) {
  Graph g;
  const Var used = g.parameter(Tensor::vector({1, 2}));
  const Var unused = g.parameter(Tensor::vector({3, 4}));
  g.backward(grad::sum(used));
  for (double v : unused.grad().data()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, NonScalarLossIsContractError) {
  Graph g;
  const Var p = g.parameter(Tensor::vector({1, 2}));
  EXPECT_THROW(g.backward(grad::scale(p, 2.0)), ContractError);
}

TEST(Backward, GradBeforeBackwardIsContractError) {
  Graph g;
  const Var p = g.parameter(Tensor::vector({1, 2}));
  EXPECT_THROW((void)p.grad(), ContractError);
}

TEST(Backward, SharedSubexpressionsAccumulate) {
  Rng rng(5);
  const Tensor x0 = testing::random_tensor(rng, {2, 3});
  auto f = [](Var x) { return grad::sum(grad::tanh(x)); };
  auto h = [](Var x) { return grad::sum(grad::square(x)); };

  auto grad_of = [&](auto build) {
    Graph g;
    const Var x = g.parameter(x0);
    g.backward(build(x));
    return x.grad();
  };
  const Tensor gf = grad_of(f);
  const Tensor gh = grad_of(h);
  const Tensor both = grad_of([&](Var x) { return grad::add(f(x), h(x)); });
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(both[i], gf[i] + gh[i], 1e-14);

  // One node consumed twice by the same op.
  Graph g;
  const Var x = g.parameter(x0);
  g.backward(grad::sum(grad::mul(x, x)));
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0 * x0[i]);
}

TEST(Backward, CheckFiniteFlagsTheOffendingOp) {
  Graph g;
  g.set_check_finite(true);
  const Var a = g.constant(Tensor::vector({1.0}));
  const Var zero = g.constant(Tensor::vector({0.0}));
  EXPECT_THROW(grad::div(a, zero), ContractError);
}

TEST(Backward, DeterministicForwardAndBackward) {
  const auto cases = testing::op_catalog();
  for (const auto& c : cases) {
    Rng rng_a(77), rng_b(77);
    const auto a = testing::make_probe(rng_a, c.op, c.inputs(rng_a)).analytic();
    const auto b = testing::make_probe(rng_b, c.op, c.inputs(rng_b)).analytic();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].storage(), b[i].storage()) << c.name;
  }
}

class OpGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OpGradient, MatchesCentralDifferences) {
  const auto c = testing::op_catalog()[GetParam()];
  Rng rng(1000 + GetParam());
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    worst = std::max(worst, testing::make_probe(rng, c.op, c.inputs(rng)).max_error());
  }
  EXPECT_LT(worst, 1e-4) << c.name;
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::Range<std::size_t>(0, testing::op_catalog().size()),
                         [](const auto& info) { return testing::op_catalog()[info.param].name; });

}  // namespace
}  // namespace wlsa

#include <gtest/gtest.h>

#include "advrand/errors.hpp"
#include "advrand/ops.hpp"
#include "oracles.hpp"

using namespace advrand;

TEST(Gradients, EveryOpAndCompositeMatchesFiniteDifferences) {
  const auto outcomes = oracles::gradient_suite(20, 1);
  EXPECT_GE(outcomes.size(), 30u);
  for (const auto& o : outcomes) EXPECT_TRUE(o.pass) << o.name << ": " << o.detail;
}

TEST(Gradients, SignHasZeroGradient) {
  Tape t;
  Var x = t.variable(Tensor::vector({-2.0, 0.0, 3.0}));
  const Tensor g = t.backward(sum(sign(x))).of(x);
  EXPECT_EQ(g, Tensor::zeros({3}));
  EXPECT_EQ(sign(x).value(), Tensor::vector({-1.0, 0.0, 1.0}));
}

TEST(Gradients, ClampPassesGradientOnlyInsideRange) {
  Tape t;
  Var x = t.variable(Tensor::vector({-1.0, 0.0, 0.5, 1.0, 2.0}));
  const Tensor g = t.backward(sum(clamp(x, 0.0, 1.0))).of(x);
  EXPECT_EQ(g, Tensor::vector({0.0, 1.0, 1.0, 1.0, 0.0}));
}

TEST(Gradients, SqrtAtZeroAndNegative) {
  Tape t;
  Var x = t.variable(Tensor::vector({0.0, 4.0}));
  const Tensor g = t.backward(sum(advrand::sqrt(x))).of(x);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.25);
  Tape u;
  EXPECT_THROW(advrand::sqrt(u.variable(Tensor::vector({-1.0}))), NumericError);
}

TEST(Gradients, NoBroadcasting) {
  Tape t;
  Var a = t.variable(Tensor::zeros({2, 3}));
  Var b = t.variable(Tensor::zeros({3}));
  EXPECT_THROW(add(a, b), DimensionError);
  EXPECT_THROW(mul(a, b), DimensionError);
  EXPECT_THROW(matmul(a, a), DimensionError);
}

TEST(Gradients, SoftmaxCrossEntropyIsStableForLargeLogits) {
  Tape t;
  Var z = t.variable(Tensor::vector({1000.0, 0.0, -1000.0}));
  Var l = softmax_cross_entropy(z, 1);
  EXPECT_NEAR(l.value().item(), 1000.0, 1e-9);
  const Tensor g = t.backward(l).of(z);
  EXPECT_TRUE(g.all_finite());
  EXPECT_NEAR(g[0], 1.0, 1e-12);
  EXPECT_NEAR(g[1], -1.0, 1e-12);
}

TEST(Gradients, UnreachedLeafGetsZeros) {
  Tape t;
  Var a = t.variable(Tensor::vector({1.0, 2.0}));
  Var b = t.variable(Tensor::vector({3.0}));
  const Gradients g = t.backward(sum(a));
  EXPECT_FALSE(g.reached(b));
  EXPECT_EQ(g.of(b), Tensor::zeros({1}));
}

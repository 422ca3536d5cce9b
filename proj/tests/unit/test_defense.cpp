#include <gtest/gtest.h>

#include <cmath>

#include "advrand/defense.hpp"
#include "advrand/errors.hpp"
#include "advrand/harness.hpp"
#include "fixtures.hpp"

using namespace advrand;

TEST(Defense, Validation) {
  DefenseConfig d;
  EXPECT_NO_THROW(d.validate());
  d.n_iterations = 0;
  EXPECT_THROW(d.validate(), ContractError);
  Rng r(1);
  const auto& t = fixtures::small_trained();
  EXPECT_THROW(randomized_predict(t.weights, t.test.images[0], RandomizationParams{}, 0, r), ContractError);
}

TEST(Defense, PatternProbabilitiesAreADistribution) {
  const auto& t = fixtures::small_trained();
  const Tensor p = pattern_probabilities(t.weights, t.test.images[0], PatternSpec::geometric(30, 2, 5), 36);
  EXPECT_EQ(p.shape(), (Shape{10}));
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_GE(p.min(), 0.0);
}

TEST(Defense, IdentityParamsMatchThePlainModel) {
  const auto& t = fixtures::small_trained();
  const RandomizationParams id = RandomizationParams::identity(28);
  for (std::size_t i = 0; i < 20; ++i) {
    Rng r(i);
    EXPECT_EQ(randomized_predict(t.weights, t.test.images[i], id, 3, r).label, predict(t.weights, t.test.images[i]));
  }
}

TEST(Defense, AveragesProbabilitiesOfTheDrawnPatterns) {
  const auto& t = fixtures::small_trained();
  const RandomizationParams p = RandomizationParams::desk_default();
  const Image& x = t.test.images[3];
  Rng r(42), replay(42);
  const DefensePrediction pred = randomized_predict(t.weights, x, p, 7, r);
  Tensor sum({10});
  for (int k = 0; k < 7; ++k) {
    const Tensor q = pattern_probabilities(t.weights, x, sample_pattern(p, replay), p.pad_target);
    for (std::size_t c = 0; c < 10; ++c) sum[c] += q[c] / 7.0;
  }
  for (std::size_t c = 0; c < 10; ++c) EXPECT_NEAR(pred.mean_probabilities[c], sum[c], 1e-12);
  std::size_t best = 0;
  for (std::size_t c = 1; c < 10; ++c)
    if (sum[c] > sum[best]) best = c;
  EXPECT_EQ(pred.label, best);
}

TEST(Defense, SameSeedSamePrediction) {
  const auto& t = fixtures::small_trained();
  RandomizationParams p;
  p.jitter = ColorJitter::all();
  p.flip_prob = 0.5;
  for (std::size_t i = 0; i < 10; ++i) {
    Rng a(i), b(i);
    const auto x = randomized_predict(t.weights, t.test.images[i], p, 4, a);
    const auto y = randomized_predict(t.weights, t.test.images[i], p, 4, b);
    EXPECT_EQ(x.label, y.label);
    EXPECT_EQ(x.mean_probabilities, y.mean_probabilities);
  }
}

TEST(Defense, TiesGoToTheLowestClass) {
  ModelWeights zero = init_model(ModelArch{}, 1);
  for (auto& nt : zero.tensors) nt.value = Tensor::zeros(nt.value.shape());
  Rng r(3);
  const DefensePrediction p = randomized_predict(zero, Tensor::full({28, 28, 3}, 0.5), RandomizationParams{}, 5, r);
  EXPECT_EQ(p.label, 0u);
  for (std::size_t c = 0; c < 10; ++c) EXPECT_NEAR(p.mean_probabilities[c], 0.1, 1e-15);
}

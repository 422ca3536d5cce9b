#include <gtest/gtest.h>

#include <set>

#include "advrand/classifier.hpp"
#include "advrand/dataset.hpp"
#include "advrand/errors.hpp"
#include "fixtures.hpp"

using namespace advrand;

TEST(Dataset, SyntheticIsDeterministicBalancedAndInRange) {
  SyntheticSpec spec;
  spec.train_count = 200;
  spec.test_count = 50;
  const auto [a, b] = generate_synthetic(spec);
  const auto [c, d] = generate_synthetic(spec);
  EXPECT_EQ(a.images, c.images);
  EXPECT_EQ(b.labels, d.labels);
  EXPECT_EQ(a.size(), 200u);
  EXPECT_EQ(b.size(), 50u);
  EXPECT_NO_THROW(a.validate(10));
  std::vector<int> counts(10, 0);
  for (auto l : a.labels) ++counts[l];
  for (int n : counts) EXPECT_EQ(n, 20);
  for (const Image& img : a.images) {
    EXPECT_EQ(img.shape(), (Shape{28, 28, 3}));
    EXPECT_EQ(img, quantize_f32(img));
  }
  spec.seed += 1;
  EXPECT_NE(generate_synthetic(spec).first.images, a.images);
}

TEST(Dataset, ValidateCatchesBadData) {
  LabeledDataset d;
  d.images = {Tensor::full({2, 2, 1}, 0.5)};
  d.labels = {12};
  EXPECT_THROW(d.validate(10), ContractError);
  d.labels = {1};
  d.images[0][0] = 1.5;
  EXPECT_THROW(d.validate(10), ContractError);
  d.images[0][0] = 0.5;
  d.labels = {1, 2};
  EXPECT_THROW(d.validate(10), ContractError);
}

TEST(Dataset, ResizeDataset) {
  SyntheticSpec spec;
  spec.train_count = 20;
  spec.test_count = 10;
  const auto test = generate_synthetic(spec).second;
  const auto r = resize_dataset(test, 35);
  EXPECT_EQ(r.images[3].shape(), (Shape{35, 35, 3}));
  EXPECT_EQ(r.labels, test.labels);
}

TEST(Model, ArchBasics) {
  ModelArch a;
  EXPECT_EQ(a.min_side(), 7u);
  EXPECT_NO_THROW(a.validate());
  ModelArch b = a;
  b.conv1_channels = 8;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  b.num_classes = 1;
  EXPECT_THROW(b.validate(), ContractError);
}

TEST(Model, InitIsDeterministicAndHasFixedLayout) {
  const ModelWeights a = init_model(ModelArch{}, 3), b = init_model(ModelArch{}, 3), c = init_model(ModelArch{}, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  ASSERT_EQ(a.tensors.size(), 6u);
  EXPECT_EQ(a.get("conv1.kernel").shape(), (Shape{3, 3, 3, 16}));
  EXPECT_EQ(a.get("dense.weight").shape(), (Shape{32, 10}));
  EXPECT_EQ(a.get("dense.bias"), Tensor::zeros({10}));
  EXPECT_THROW(a.get("nope"), IndexError);
}

TEST(Model, AcceptsAnySideAboveMinimum) {
  const ModelWeights w = init_model(ModelArch{}, 3);
  for (std::size_t side : {7, 28, 35, 36}) {
    EXPECT_EQ(forward_logits(w, Tensor::full({side, side, 3}, 0.5)).shape(), (Shape{10})) << side;
  }
  EXPECT_THROW(forward_logits(w, Tensor::full({6, 6, 3}, 0.5)), DimensionError);
  EXPECT_THROW(forward_logits(w, Tensor::full({28, 28, 1}, 0.5)), DimensionError);
}

TEST(Model, TrainingLearnsTheShapes) {
  const auto& t = fixtures::small_trained();
  // chance is 0.1
  EXPECT_GT(accuracy(t.weights, t.test), 0.4);
  EXPECT_EQ(accuracy(t.weights, LabeledDataset{}), 0.0);
}

TEST(Model, TrainingIsDeterministicAndReportsEpochs) {
  SyntheticSpec spec;
  spec.train_count = 100;
  spec.test_count = 10;
  const auto train_set = generate_synthetic(spec).first;
  TrainConfig cfg;
  cfg.epochs = 2;
  std::vector<std::size_t> seen;
  cfg.on_epoch = [&](const EpochStats& s) { seen.push_back(s.epoch); };
  const ModelWeights init = init_model(ModelArch{}, 1);
  const ModelWeights a = train(init, train_set, cfg);
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(a, train(init, train_set, cfg));
  EXPECT_NE(a, init);
}

TEST(Model, ZeroMixAdversarialTrainingEqualsTraining) {
  SyntheticSpec spec;
  spec.train_count = 100;
  spec.test_count = 10;
  const auto train_set = generate_synthetic(spec).first;
  TrainConfig cfg;
  cfg.epochs = 1;
  const ModelWeights init = init_model(ModelArch{}, 1);
  ModelWeights adv = adversarial_train(init, train_set, cfg, AdversarialMix{{0.02}, 0.0});
  EXPECT_EQ(adv.tensors, train(init, train_set, cfg).tensors);
  ModelWeights mixed = adversarial_train(init, train_set, cfg, AdversarialMix{{0.02}, 0.5});
  EXPECT_NE(mixed.tensors, adv.tensors);
  EXPECT_TRUE(mixed.adversarially_trained);
  EXPECT_THROW(adversarial_train(init, train_set, cfg, AdversarialMix{{1.5}, 0.5}), ContractError);
}

TEST(Model, CorrectSubsetIsCorrectForEveryModelAndOrdered) {
  const auto& t = fixtures::small_trained();
  const ModelWeights other = init_model(ModelArch{}, 1);
  const auto sub = select_correct_subset({&t.weights}, t.test, 50, 4);
  EXPECT_EQ(sub.size(), 50u);
  EXPECT_EQ(accuracy(t.weights, sub), 1.0);
  EXPECT_EQ(sub.images, select_correct_subset({&t.weights}, t.test, 50, 4).images);
  EXPECT_THROW(select_correct_subset({&t.weights}, t.test, 301, 4), ContractError);
  // an untrained model agrees on few images, so asking for all of them fails
  EXPECT_THROW(select_correct_subset({&t.weights, &other}, t.test, 250, 4), ContractError);
}

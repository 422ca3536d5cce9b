#pragma once

// Small trained model shared by the tests that need a real classifier.

#include "advrand/classifier.hpp"
#include "advrand/dataset.hpp"

namespace fixtures {

struct Trained {
  advrand::LabeledDataset train;
  advrand::LabeledDataset test;
  advrand::ModelWeights weights;
};

inline const Trained& small_trained() {
  static const Trained t = [] {
    advrand::SyntheticSpec spec;
    spec.train_count = 2000;
    spec.test_count = 300;
    spec.seed = 99;
    auto [train, test] = advrand::generate_synthetic(spec);
    advrand::TrainConfig cfg;
    cfg.epochs = 6;
    cfg.seed = 5;
    auto w = advrand::train(advrand::init_model(advrand::ModelArch{}, 7), train, cfg);
    return Trained{std::move(train), std::move(test), std::move(w)};
  }();
  return t;
}

}  // namespace fixtures

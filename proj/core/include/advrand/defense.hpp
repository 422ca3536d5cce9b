#pragma once

#include <cstddef>

#include "advrand/classifier.hpp"
#include "advrand/pattern.hpp"
#include "advrand/rng.hpp"
#include "advrand/tensor.hpp"

namespace advrand {

/// Randomisation layers in front of a frozen model, plus the number of
/// patterns whose predictions are averaged per image.
struct DefenseConfig {
  RandomizationParams params;
  std::size_t n_iterations = 1;

  void validate() const;

  friend bool operator==(const DefenseConfig&, const DefenseConfig&) = default;
};

struct DefensePrediction {
  std::size_t label = 0;
  Tensor mean_probabilities;
};

/// Softmax probabilities of the model on the image after `spec`.
Tensor pattern_probabilities(const ModelWeights& weights, const Image& image, const PatternSpec& spec,
                             std::size_t pad_target);

/// Draws n_iterations patterns from `rng`, averages the softmax
/// probabilities and returns their argmax (lowest class on ties).
DefensePrediction randomized_predict(const ModelWeights& weights, const Image& image, const RandomizationParams& params,
                                     std::size_t n_iterations, Rng& rng);

}  // namespace advrand

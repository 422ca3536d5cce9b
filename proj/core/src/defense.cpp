#include "advrand/defense.hpp"

#include "advrand/errors.hpp"
#include "advrand/ops.hpp"

namespace advrand {

void DefenseConfig::validate() const {
  params.validate();
  if (n_iterations == 0) throw ContractError("defense n_iterations must be at least 1");
}

Tensor pattern_probabilities(const ModelWeights& weights, const Image& image, const PatternSpec& spec,
                             std::size_t pad_target) {
  return softmax(forward_logits(weights, apply_pattern(image, spec, pad_target)));
}

DefensePrediction randomized_predict(const ModelWeights& weights, const Image& image, const RandomizationParams& params,
                                     std::size_t n_iterations, Rng& rng) {
  if (n_iterations == 0) throw ContractError("randomized_predict: n_iterations must be at least 1");
  Tensor total = Tensor::zeros({weights.arch.num_classes});
  for (std::size_t n = 0; n < n_iterations; ++n) {
    const PatternSpec spec = sample_pattern(params, rng);
    const Tensor p = pattern_probabilities(weights, image, spec, params.pad_target);
    for (std::size_t c = 0; c < p.size(); ++c) total[c] += p[c];
  }
  for (double& v : total.data()) v /= static_cast<double>(n_iterations);
  return {argmax(total), total};
}

}  // namespace advrand

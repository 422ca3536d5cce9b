#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advrand/dataset.hpp"
#include "advrand/pattern.hpp"
#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

namespace advrand {

/// conv(3x3, conv1)-relu-conv(3x3, conv2)-relu-global average pool-dense.
/// Global pooling makes the network accept any square side >= min_side().
struct ModelArch {
  std::size_t input_side = 28;
  std::size_t channels = 3;
  std::size_t conv1_channels = 16;
  std::size_t conv2_channels = 32;
  std::size_t num_classes = 10;
  std::size_t kernel = 3;
  std::size_t conv1_stride = 2;
  std::size_t conv2_stride = 2;

  /// Smallest input side for which both convolutions produce output.
  std::size_t min_side() const;
  std::string fingerprint() const;
  void validate() const;

  friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct ModelWeights {
  ModelArch arch;
  std::vector<NamedTensor> tensors;  // fixed order, see init_model
  std::uint64_t training_seed = 0;
  bool adversarially_trained = false;

  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

/// Glorot-uniform kernels, zero biases. Deterministic in (arch, seed).
ModelWeights init_model(const ModelArch& arch, std::uint64_t seed);

/// Model parameters placed on a tape, either as constants (attacks) or as
/// variables (training).
struct BoundModel {
  const ModelArch* arch = nullptr;
  std::vector<Var> params;  // same order as ModelWeights::tensors
};

BoundModel bind(Tape& tape, const ModelWeights& weights, bool trainable);

/// Logits [num_classes] for an H x W x channels image on the tape.
Var forward_logits(const BoundModel& model, const Var& image);

/// Tape-free convenience wrappers.
Tensor forward_logits(const ModelWeights& weights, const Tensor& image);
std::size_t predict(const ModelWeights& weights, const Tensor& image);

/// Top-1 accuracy in [0, 1]; 0 for an empty dataset.
double accuracy(const ModelWeights& weights, const LabeledDataset& data);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
};

/// Training-time augmentation. Each sample independently goes through a
/// random resize+pad pattern with probability `pattern_prob` and through
/// colour jitter with probability `jitter_prob`.
struct Augmentation {
  double pattern_prob = 0.0;
  double jitter_prob = 0.0;
  RandomizationParams params;
};

struct TrainConfig {
  std::size_t epochs = 12;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  Augmentation augmentation;
  std::function<void(const EpochStats&)> on_epoch;
};

struct AdversarialMix {
  std::vector<double> epsilons;  // each in (0, 1)
  double mix_fraction = 0.5;     // in [0, 1]
};

/// Minibatch SGD with momentum on mean softmax cross-entropy. Fully
/// determined by its arguments.
ModelWeights train(const ModelWeights& init, const LabeledDataset& data, const TrainConfig& config);

/// As train(), but in every batch the first round(mix_fraction * batch)
/// examples are replaced by FGSM examples crafted against the current
/// weights, with epsilon drawn uniformly from `mix.epsilons`. The random
/// choices for the adversarial part come from a stream separate from the
/// shuffling stream, so mix_fraction = 0 reproduces train() exactly.
ModelWeights adversarial_train(const ModelWeights& init, const LabeledDataset& data, const TrainConfig& config,
                               const AdversarialMix& mix);

/// Random n-subset (order kept as in `data`) of the images every model
/// classifies correctly. Throws ContractError when fewer than n qualify.
LabeledDataset select_correct_subset(const std::vector<const ModelWeights*>& models, const LabeledDataset& data,
                                     std::size_t n, std::uint64_t seed);

}  // namespace advrand

#include "advrand/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "advrand/attacks.hpp"
#include "advrand/errors.hpp"
#include "advrand/ops.hpp"

namespace advrand {

namespace {
constexpr const char* kNames[] = {"conv1.kernel", "conv1.bias", "conv2.kernel", "conv2.bias", "dense.weight",
                                  "dense.bias"};
}

std::size_t ModelArch::min_side() const { return kernel + (kernel - 1) * conv1_stride; }

std::string ModelArch::fingerprint() const {
  std::ostringstream os;
  os << "in" << input_side << "x" << channels << "/conv" << kernel << "s" << conv1_stride << "-" << conv1_channels
     << "/conv" << kernel << "s" << conv2_stride << "-" << conv2_channels << "/gap/dense-" << num_classes;
  return os.str();
}

void ModelArch::validate() const {
  if (channels == 0 || conv1_channels == 0 || conv2_channels == 0 || kernel == 0 || conv1_stride == 0 ||
      conv2_stride == 0) {
    throw ContractError("model architecture sizes must be positive");
  }
  if (num_classes < 2) throw ContractError("a classifier needs at least two classes");
  if (input_side < min_side()) {
    throw ContractError("input side " + std::to_string(input_side) + " below the minimum " +
                        std::to_string(min_side()));
  }
}

const Tensor& ModelWeights::get(const std::string& name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return t.value;
  throw IndexError("no tensor named '" + name + "'");
}

Tensor& ModelWeights::get(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ModelWeights&>(*this).get(name));
}

ModelWeights init_model(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(derive_seed({seed, hash_string("init")}));
  auto glorot = [&](Shape shape, double fan_in, double fan_out) {
    Tensor t(std::move(shape));
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.data()) v = rng.uniform(-s, s);
    return t;
  };
  const double k2 = static_cast<double>(arch.kernel * arch.kernel);
  ModelWeights w;
  w.arch = arch;
  w.training_seed = seed;
  w.tensors = {
      {kNames[0], glorot({arch.kernel, arch.kernel, arch.channels, arch.conv1_channels},
                         k2 * static_cast<double>(arch.channels), k2 * static_cast<double>(arch.conv1_channels))},
      {kNames[1], Tensor::zeros({arch.conv1_channels})},
      {kNames[2], glorot({arch.kernel, arch.kernel, arch.conv1_channels, arch.conv2_channels},
                         k2 * static_cast<double>(arch.conv1_channels), k2 * static_cast<double>(arch.conv2_channels))},
      {kNames[3], Tensor::zeros({arch.conv2_channels})},
      {kNames[4], glorot({arch.conv2_channels, arch.num_classes}, static_cast<double>(arch.conv2_channels),
                         static_cast<double>(arch.num_classes))},
      {kNames[5], Tensor::zeros({arch.num_classes})},
  };
  return w;
}

BoundModel bind(Tape& tape, const ModelWeights& weights, bool trainable) {
  BoundModel m;
  m.arch = &weights.arch;
  for (const NamedTensor& t : weights.tensors)
    m.params.push_back(trainable ? tape.variable(t.value) : tape.constant(t.value));
  return m;
}

namespace {

Var conv_block(const Var& x, const Var& kernel, const Var& bias, std::size_t stride) {
  Var y = conv2d(x, kernel, stride);
  const Shape& s = y.shape();
  Var b = reshape(tile(bias, s[0] * s[1]), s);
  return relu(add(y, b));
}

}  // namespace

Var forward_logits(const BoundModel& model, const Var& image) {
  const ModelArch& arch = *model.arch;
  const Tensor& x = image.value();
  if (x.rank() != 3) throw DimensionError("forward_logits: expected H x W x C image, got " + shape_string(x.shape()));
  if (x.dim(2) != arch.channels) {
    throw DimensionError("forward_logits: model expects " + std::to_string(arch.channels) + " channels, got " +
                         std::to_string(x.dim(2)));
  }
  if (x.dim(0) < arch.min_side() || x.dim(1) < arch.min_side()) {
    throw DimensionError("forward_logits: image " + shape_string(x.shape()) + " smaller than the minimum side " +
                         std::to_string(arch.min_side()));
  }
  const auto& p = model.params;
  Var h = conv_block(image, p[0], p[1], arch.conv1_stride);
  h = conv_block(h, p[2], p[3], arch.conv2_stride);
  Var pooled = reshape(global_avg_pool(h), {1, arch.conv2_channels});
  Var logits = reshape(matmul(pooled, p[4]), {arch.num_classes});
  return add(logits, p[5]);
}

Tensor forward_logits(const ModelWeights& weights, const Tensor& image) {
  Tape tape;
  BoundModel m = bind(tape, weights, false);
  return forward_logits(m, tape.constant(image)).value();
}

std::size_t predict(const ModelWeights& weights, const Tensor& image) {
  return argmax(forward_logits(weights, image));
}

double accuracy(const ModelWeights& weights, const LabeledDataset& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += predict(weights, data.images[i]) == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

TargetModel bare_target(const ModelWeights& w) {
  return TargetModel::single([&w](Tape& tape, const Var& image) { return forward_logits(bind(tape, w, false), image); });
}

Image augment(const Image& image, const Augmentation& aug, Rng& rng) {
  const bool geometric = rng.bernoulli(aug.pattern_prob);
  const bool colour = rng.bernoulli(aug.jitter_prob);
  PatternSpec spec = sample_pattern(aug.params, rng);
  std::size_t canvas = aug.params.pad_target;
  if (!geometric) {
    spec.resize_to = image.dim(0);
    spec.pad_left = spec.pad_top = 0;
    spec.flip = false;
    canvas = image.dim(0);
  }
  if (!colour) spec.brightness = spec.saturation = spec.hue = spec.contrast = std::nullopt;
  if (!geometric && !colour) return image;
  return apply_pattern(image, spec, canvas);
}

ModelWeights run_training(const ModelWeights& init, const LabeledDataset& data, const TrainConfig& cfg,
                          const AdversarialMix* mix) {
  if (data.empty()) throw ContractError("training needs a non-empty dataset");
  if (cfg.batch_size == 0 || cfg.epochs == 0) throw ContractError("epochs and batch size must be positive");
  if (!(cfg.lr > 0.0)) throw ContractError("learning rate must be positive");
  if (cfg.augmentation.pattern_prob > 0.0 || cfg.augmentation.jitter_prob > 0.0) cfg.augmentation.params.validate();
  data.validate(init.arch.num_classes);

  std::size_t n_adv = 0;
  if (mix) {
    if (!(mix->mix_fraction >= 0.0 && mix->mix_fraction <= 1.0)) throw ContractError("mix_fraction must lie in [0, 1]");
    if (mix->epsilons.empty()) throw ContractError("adversarial training needs at least one epsilon");
    for (double e : mix->epsilons)
      if (!(e > 0.0 && e < 1.0)) throw ContractError("adversarial epsilons must lie in (0, 1)");
    n_adv = static_cast<std::size_t>(std::floor(mix->mix_fraction * static_cast<double>(cfg.batch_size) + 0.5));
  }

  ModelWeights w = init;
  std::vector<Tensor> velocity;
  for (const NamedTensor& t : w.tensors) velocity.push_back(Tensor::zeros(t.value.shape()));

  Rng shuffle_rng(derive_seed({cfg.seed, hash_string("shuffle")}));
  Rng augment_rng(derive_seed({cfg.seed, hash_string("augment")}));
  Rng adversarial_rng(derive_seed({cfg.seed, hash_string("adversarial")}));
  const bool augmenting = cfg.augmentation.pattern_prob > 0.0 || cfg.augmentation.jitter_prob > 0.0;

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Tensor> grads;
      for (const NamedTensor& t : w.tensors) grads.push_back(Tensor::zeros(t.value.shape()));

      for (std::size_t j = start; j < end; ++j) {
        const std::size_t idx = order[j];
        Image x = augmenting ? augment(data.images[idx], cfg.augmentation, augment_rng) : data.images[idx];
        if (j - start < n_adv) {
          const auto pick = adversarial_rng.uniform_int(0, static_cast<std::int64_t>(mix->epsilons.size()) - 1);
          x = fgsm(bare_target(w), x, data.labels[idx], mix->epsilons[static_cast<std::size_t>(pick)]).adversarial;
        }
        Tape tape;
        BoundModel m = bind(tape, w, true);
        Var loss = softmax_cross_entropy(forward_logits(m, tape.constant(x)), data.labels[idx]);
        epoch_loss += loss.value().item();
        Gradients g = tape.backward(loss);
        for (std::size_t p = 0; p < grads.size(); ++p) {
          const Tensor gp = g.of(m.params[p]);
          for (std::size_t e = 0; e < gp.size(); ++e) grads[p][e] += gp[e];
        }
      }

      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t p = 0; p < grads.size(); ++p) {
        Tensor& v = velocity[p];
        Tensor& param = w.tensors[p].value;
        for (std::size_t e = 0; e < v.size(); ++e) {
          v[e] = cfg.momentum * v[e] + grads[p][e] * inv;
          param[e] -= cfg.lr * v[e];
        }
      }
    }
    const double mean_loss = epoch_loss / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) throw NumericError("training diverged in epoch " + std::to_string(epoch));
    if (cfg.on_epoch) cfg.on_epoch(EpochStats{epoch, mean_loss});
  }
  w.training_seed = cfg.seed;
  return w;
}

}  // namespace

ModelWeights train(const ModelWeights& init, const LabeledDataset& data, const TrainConfig& config) {
  ModelWeights w = run_training(init, data, config, nullptr);
  w.adversarially_trained = init.adversarially_trained;
  return w;
}

ModelWeights adversarial_train(const ModelWeights& init, const LabeledDataset& data, const TrainConfig& config,
                               const AdversarialMix& mix) {
  ModelWeights w = run_training(init, data, config, &mix);
  w.adversarially_trained = true;
  return w;
}

LabeledDataset select_correct_subset(const std::vector<const ModelWeights*>& models, const LabeledDataset& data,
                                     std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> qualifying;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool all = std::all_of(models.begin(), models.end(),
                                 [&](const ModelWeights* m) { return predict(*m, data.images[i]) == data.labels[i]; });
    if (all) qualifying.push_back(i);
  }
  if (qualifying.size() < n) {
    throw ContractError("only " + std::to_string(qualifying.size()) + " images are classified correctly by every model, " +
                        std::to_string(n) + " requested");
  }
  Rng rng(derive_seed({seed, hash_string("select")}));
  rng.shuffle(qualifying);
  qualifying.resize(n);
  std::sort(qualifying.begin(), qualifying.end());
  return data.subset(qualifying);
}

}  // namespace advrand

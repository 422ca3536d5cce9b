#include "advrand/pattern.hpp"

#include <sstream>

#include "advrand/errors.hpp"
#include "advrand/image_ops.hpp"
#include "advrand/ops.hpp"

namespace advrand {

RandomizationParams RandomizationParams::identity(std::size_t base_side) {
  RandomizationParams p;
  p.base_side = base_side;
  p.resize_min = base_side;
  p.resize_max_exclusive = base_side + 1;
  p.pad_target = base_side;
  return p;
}

void RandomizationParams::validate() const {
  if (base_side == 0 || resize_min == 0 || pad_target == 0) {
    throw ContractError("randomization sizes must be positive");
  }
  if (resize_min >= resize_max_exclusive) {
    throw ContractError("empty resize range [" + std::to_string(resize_min) + ", " +
                        std::to_string(resize_max_exclusive) + ")");
  }
  if (resize_max_exclusive - 1 > pad_target) {
    throw ContractError("largest resize " + std::to_string(resize_max_exclusive - 1) + " exceeds pad target " +
                        std::to_string(pad_target));
  }
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ContractError("flip_prob must lie in [0, 1]");
  auto check_range = [](const std::pair<double, double>& r, const char* what) {
    if (!(r.first > 0.0 && r.first <= r.second)) throw ContractError(std::string(what) + " range must be 0 < lo <= hi");
  };
  if (jitter.brightness_max && !(*jitter.brightness_max >= 0.0)) throw ContractError("brightness max must be >= 0");
  if (jitter.hue_max && !(*jitter.hue_max >= 0.0 && *jitter.hue_max <= 0.5)) {
    throw ContractError("hue max must lie in [0, 0.5]");
  }
  if (jitter.saturation) check_range(*jitter.saturation, "saturation");
  if (jitter.contrast) check_range(*jitter.contrast, "contrast");
}

void PatternSpec::validate(std::size_t pad_target) const {
  if (resize_to == 0) throw ContractError("pattern resize side must be positive");
  if (resize_to + pad_left > pad_target || resize_to + pad_top > pad_target) {
    throw ContractError("pattern " + describe() + " does not fit a canvas of side " + std::to_string(pad_target));
  }
}

std::string PatternSpec::describe() const {
  std::ostringstream os;
  os << "rnd=" << resize_to << " left=" << pad_left << " top=" << pad_top;
  if (flip) os << " flip";
  if (brightness) os << " brightness=" << *brightness;
  if (saturation) os << " saturation=" << *saturation;
  if (hue) os << " hue=" << *hue;
  if (contrast) os << " contrast=" << *contrast;
  return os.str();
}

std::uint64_t count_patterns(const RandomizationParams& params) {
  params.validate();
  std::uint64_t total = 0;
  for (std::size_t rnd = params.resize_min; rnd < params.resize_max_exclusive; ++rnd) {
    const std::uint64_t free = params.pad_target - rnd + 1;
    total += free * free;
  }
  return total;
}

PatternSpec sample_pattern(const RandomizationParams& params, Rng& rng) {
  params.validate();
  PatternSpec p;
  p.resize_to = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(params.resize_min),
                                                         static_cast<std::int64_t>(params.resize_max_exclusive) - 1));
  const auto slack = static_cast<std::int64_t>(params.pad_target - p.resize_to);
  p.pad_left = static_cast<std::size_t>(rng.uniform_int(0, slack));
  p.pad_top = static_cast<std::size_t>(rng.uniform_int(0, slack));
  p.flip = rng.bernoulli(params.flip_prob);
  const ColorJitter& j = params.jitter;
  if (j.brightness_max) p.brightness = rng.uniform(-*j.brightness_max, *j.brightness_max);
  if (j.saturation) p.saturation = rng.uniform(j.saturation->first, j.saturation->second);
  if (j.hue_max) p.hue = rng.uniform(-*j.hue_max, *j.hue_max);
  if (j.contrast) p.contrast = rng.uniform(j.contrast->first, j.contrast->second);
  return p;
}

Var apply_pattern(const Var& image, const PatternSpec& spec, std::size_t pad_target) {
  spec.validate(pad_target);
  if (image.value().rank() != 3) throw DimensionError("apply_pattern: expected an H x W x C image");
  Var x = spec.flip ? flip_horizontal(image) : image;
  x = resize_bilinear(x, spec.resize_to, spec.resize_to);
  x = pad_zero(x, spec.pad_top, spec.pad_left, pad_target, pad_target);
  if (spec.brightness) x = adjust_brightness(x, *spec.brightness);
  if (spec.saturation) x = adjust_saturation(x, *spec.saturation);
  if (spec.hue) x = adjust_hue(x, *spec.hue);
  if (spec.contrast) x = adjust_contrast(x, *spec.contrast);
  return clamp(x, 0.0, 1.0);
}

Tensor apply_pattern(const Tensor& image, const PatternSpec& spec, std::size_t pad_target) {
  Tape tape;
  return apply_pattern(tape.constant(image), spec, pad_target).value();
}

}  // namespace advrand

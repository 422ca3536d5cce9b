#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advrand/rng.hpp"
#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

namespace advrand {

/// Colour randomisation ranges. A disengaged field means that adjustment is
/// off. Brightness and hue are symmetric (+-max); saturation and contrast are
/// multiplicative [lo, hi].
struct ColorJitter {
  std::optional<double> brightness_max;
  std::optional<std::pair<double, double>> saturation;
  std::optional<double> hue_max;
  std::optional<std::pair<double, double>> contrast;

  bool any() const { return brightness_max || saturation || hue_max || contrast; }

  // Ranges used by the standard Inception preprocessing pipeline.
  static ColorJitter brightness() { return {32.0 / 255.0, {}, {}, {}}; }
  static ColorJitter saturation_only() { return {{}, std::pair{0.5, 1.5}, {}, {}}; }
  static ColorJitter hue() { return {{}, {}, 0.2, {}}; }
  static ColorJitter contrast_only() { return {{}, {}, {}, std::pair{0.5, 1.5}}; }
  static ColorJitter all() { return {32.0 / 255.0, std::pair{0.5, 1.5}, 0.2, std::pair{0.5, 1.5}}; }

  friend bool operator==(const ColorJitter&, const ColorJitter&) = default;
};

/// Parameters of the randomisation layers. The resized side is drawn from
/// [resize_min, resize_max_exclusive) and the result is zero-padded to
/// pad_target x pad_target at a random offset.
struct RandomizationParams {
  std::size_t base_side = 28;
  std::size_t resize_min = 28;
  std::size_t resize_max_exclusive = 36;
  std::size_t pad_target = 36;
  double flip_prob = 0.0;
  ColorJitter jitter;

  /// Desk-scale analogue of 299 -> [299, 331) -> 331.
  static RandomizationParams desk_default() { return {}; }
  /// Resize range [base, base + 1), canvas = base: the single identity pattern.
  static RandomizationParams identity(std::size_t base_side);

  void validate() const;

  friend bool operator==(const RandomizationParams&, const RandomizationParams&) = default;
};

/// One concrete instantiation of the randomisation layers.
struct PatternSpec {
  std::size_t resize_to = 0;
  std::size_t pad_left = 0;
  std::size_t pad_top = 0;
  bool flip = false;
  std::optional<double> brightness;
  std::optional<double> saturation;
  std::optional<double> hue;
  std::optional<double> contrast;

  /// Resize + pad only: no flip, no colour change.
  static PatternSpec geometric(std::size_t resize_to, std::size_t pad_left, std::size_t pad_top) {
    PatternSpec p;
    p.resize_to = resize_to;
    p.pad_left = pad_left;
    p.pad_top = pad_top;
    return p;
  }

  /// Throws ContractError unless the resized image fits the canvas.
  void validate(std::size_t pad_target) const;
  std::string describe() const;

  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

/// Number of geometric (resize, left, top) patterns:
/// sum over rnd in [resize_min, resize_max_exclusive) of (T - rnd + 1)^2.
std::uint64_t count_patterns(const RandomizationParams& params);

/// Draws, in order: resize side, left offset, top offset, flip, then each
/// enabled colour factor (brightness, saturation, hue, contrast).
PatternSpec sample_pattern(const RandomizationParams& params, Rng& rng);

/// flip -> bilinear resize to rnd x rnd -> zero pad to T x T at (left, top)
/// -> colour jitter -> clip to [0, 1]. Differentiable w.r.t. the image.
Var apply_pattern(const Var& image, const PatternSpec& spec, std::size_t pad_target);
Tensor apply_pattern(const Tensor& image, const PatternSpec& spec, std::size_t pad_target);

}  // namespace advrand

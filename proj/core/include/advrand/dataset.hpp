#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "advrand/tensor.hpp"

namespace advrand {

struct LabeledDataset {
  std::vector<Image> images;  // each side x side x channels, values in [0, 1]
  std::vector<std::uint32_t> labels;
  std::string split;  // "train", "test", or free-form

  std::size_t size() const noexcept { return images.size(); }
  bool empty() const noexcept { return images.empty(); }

  /// Checks pixel range, matching image shapes, label count and label < num_classes.
  void validate(std::size_t num_classes) const;

  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

/// Procedural shapes dataset: ten parametric shape classes (disk, ring,
/// square, outlined square, horizontal bar, vertical bar, two diagonals,
/// plus, cross) in random colours on a dark random background with uniform
/// pixel noise. Classes are balanced. Pixels are rounded to float precision
/// so the in-memory set equals one read back from a raster file.
struct SyntheticSpec {
  std::size_t side = 28;
  std::size_t channels = 3;  // 1 or 3
  std::size_t train_count = 8000;
  std::size_t test_count = 2000;
  std::uint64_t seed = 20171109;
  double noise = 0.08;

  static constexpr std::size_t kNumClasses = 10;
};

std::pair<LabeledDataset, LabeledDataset> generate_synthetic(const SyntheticSpec& spec);

/// Every image resized (bilinear, half-pixel) to side x side.
LabeledDataset resize_dataset(const LabeledDataset& data, std::size_t side);

/// Round every pixel through float32.
Image quantize_f32(const Image& image);

}  // namespace advrand

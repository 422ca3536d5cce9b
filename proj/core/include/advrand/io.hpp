#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "advrand/classifier.hpp"
#include "advrand/dataset.hpp"

// Binary containers. Both start with an 8-byte magic, then a u32
// little-endian byte count and that many bytes of UTF-8 JSON header, then
// the little-endian payload.
//
//   raster  "ADVRAST1"  {count, height, width, channels, dtype:"f32le", labels_present}
//           float32 pixels, image-major, row-major (y, x, c); then u32 labels
//   weights "ADVWGT01"  {arch, fingerprint, tensors:[{name, shape}], training_seed, adversarially_trained}
//           float64 tensor payloads in manifest order

namespace advrand {

inline constexpr std::string_view kRasterMagic = "ADVRAST1";
inline constexpr std::string_view kWeightMagic = "ADVWGT01";

std::string encode_raster(const LabeledDataset& data, bool with_labels = true);
/// `source` names the input in error messages.
LabeledDataset decode_raster(std::string_view bytes, const std::string& source = "<memory>");

std::string encode_weights(const ModelWeights& weights);
ModelWeights decode_weights(std::string_view bytes, const std::string& source = "<memory>");

void save_raster(const std::filesystem::path& path, const LabeledDataset& data, bool with_labels = true);
LabeledDataset load_raster(const std::filesystem::path& path);
void save_weights(const std::filesystem::path& path, const ModelWeights& weights);
ModelWeights load_weights(const std::filesystem::path& path);

/// Whole-file helpers; PathError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// 64-bit FNV-1a of the encoded form, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace advrand

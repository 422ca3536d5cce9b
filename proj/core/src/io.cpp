#include "advrand/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advrand/errors.hpp"
#include "advrand/rng.hpp"

namespace advrand {

using nlohmann::json;

namespace {

template <class U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class U>
U get_le(std::string_view bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

std::string container(std::string_view magic, const json& header) {
  const std::string text = header.dump();
  std::string out(magic);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  return out;
}

struct Parsed {
  json header;
  std::string_view body;
};

Parsed open_container(std::string_view bytes, std::string_view magic, const std::string& source) {
  if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic) {
    throw FormatError(source + ": bad magic, expected " + std::string(magic));
  }
  if (bytes.size() < magic.size() + 4) throw FormatError(source + ": truncated before the header length");
  const auto len = get_le<std::uint32_t>(bytes, magic.size());
  const std::size_t start = magic.size() + 4;
  if (bytes.size() - start < len) {
    throw FormatError(source + ": header declares " + std::to_string(len) + " bytes, only " +
                      std::to_string(bytes.size() - start) + " present");
  }
  Parsed p;
  try {
    p.header = json::parse(bytes.substr(start, len));
  } catch (const json::exception& e) {
    throw FormatError(source + ": malformed header: " + e.what());
  }
  if (!p.header.is_object()) throw FormatError(source + ": header is not a JSON object");
  p.body = bytes.substr(start + len);
  return p;
}

template <class T>
T field(const json& j, const char* key, const std::string& source) {
  if (!j.contains(key)) throw FormatError(source + ": header lacks '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(source + ": header field '" + key + "' has the wrong type");
  }
}

void check_body(std::string_view body, std::size_t expected, const std::string& source) {
  if (body.size() != expected) {
    throw FormatError(source + ": body is " + std::to_string(body.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
}

json arch_json(const ModelArch& a) {
  return json{{"input_side", a.input_side},         {"channels", a.channels},
              {"conv1_channels", a.conv1_channels}, {"conv2_channels", a.conv2_channels},
              {"num_classes", a.num_classes},       {"kernel", a.kernel},
              {"conv1_stride", a.conv1_stride},     {"conv2_stride", a.conv2_stride}};
}

ModelArch arch_from_json(const json& j, const std::string& source) {
  if (!j.is_object()) throw FormatError(source + ": 'arch' is not an object");
  ModelArch a;
  a.input_side = field<std::size_t>(j, "input_side", source);
  a.channels = field<std::size_t>(j, "channels", source);
  a.conv1_channels = field<std::size_t>(j, "conv1_channels", source);
  a.conv2_channels = field<std::size_t>(j, "conv2_channels", source);
  a.num_classes = field<std::size_t>(j, "num_classes", source);
  a.kernel = field<std::size_t>(j, "kernel", source);
  a.conv1_stride = field<std::size_t>(j, "conv1_stride", source);
  a.conv2_stride = field<std::size_t>(j, "conv2_stride", source);
  return a;
}

}  // namespace

std::string encode_raster(const LabeledDataset& data, bool with_labels) {
  const std::size_t count = data.size();
  Shape shape = count ? data.images.front().shape() : Shape{0, 0, 0};
  if (count && shape.size() != 3) throw DimensionError("raster images must be H x W x C");
  with_labels = with_labels && !data.labels.empty();
  if (with_labels && data.labels.size() != count) throw ContractError("raster label count differs from image count");

  json header{{"count", count},         {"height", shape[0]}, {"width", shape[1]}, {"channels", shape[2]},
              {"dtype", "f32le"},       {"labels_present", with_labels}};
  std::string out = container(kRasterMagic, header);
  out.reserve(out.size() + count * shape_size(shape) * 4 + (with_labels ? count * 4 : 0));
  for (std::size_t i = 0; i < count; ++i) {
    const Image& im = data.images[i];
    if (im.shape() != shape) throw DimensionError("raster images must share one shape");
    for (double v : im.data()) {
      if (!(v >= 0.0 && v <= 1.0)) throw ContractError("raster pixel outside [0, 1] in image " + std::to_string(i));
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  if (with_labels)
    for (std::uint32_t l : data.labels) put_le<std::uint32_t>(out, l);
  return out;
}

LabeledDataset decode_raster(std::string_view bytes, const std::string& source) {
  Parsed p = open_container(bytes, kRasterMagic, source);
  const auto count = field<std::size_t>(p.header, "count", source);
  const auto h = field<std::size_t>(p.header, "height", source);
  const auto w = field<std::size_t>(p.header, "width", source);
  const auto c = field<std::size_t>(p.header, "channels", source);
  const auto dtype = field<std::string>(p.header, "dtype", source);
  const auto labels = field<bool>(p.header, "labels_present", source);
  if (dtype != "f32le") throw FormatError(source + ": unsupported dtype '" + dtype + "', expected f32le");
  if (count > 0 && (h == 0 || w == 0 || c == 0)) throw FormatError(source + ": zero image dimension");

  const std::size_t per_image = h * w * c;
  check_body(p.body, count * per_image * 4 + (labels ? count * 4 : 0), source);

  LabeledDataset data;
  data.images.reserve(count);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Image im({h, w, c});
    for (double& v : im.data()) {
      const float f = std::bit_cast<float>(get_le<std::uint32_t>(p.body, offset));
      offset += 4;
      if (!(f >= 0.0f && f <= 1.0f)) throw FormatError(source + ": pixel outside [0, 1] in image " + std::to_string(i));
      v = f;
    }
    data.images.push_back(std::move(im));
  }
  if (labels) {
    data.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i, offset += 4) data.labels.push_back(get_le<std::uint32_t>(p.body, offset));
  }
  return data;
}

std::string encode_weights(const ModelWeights& weights) {
  json tensors = json::array();
  std::size_t payload = 0;
  for (const NamedTensor& t : weights.tensors) {
    tensors.push_back({{"name", t.name}, {"shape", t.value.shape()}});
    payload += t.value.size() * 8;
  }
  json header{{"arch", arch_json(weights.arch)},
              {"fingerprint", weights.arch.fingerprint()},
              {"tensors", tensors},
              {"training_seed", weights.training_seed},
              {"adversarially_trained", weights.adversarially_trained}};
  std::string out = container(kWeightMagic, header);
  out.reserve(out.size() + payload);
  for (const NamedTensor& t : weights.tensors)
    for (double v : t.value.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ModelWeights decode_weights(std::string_view bytes, const std::string& source) {
  Parsed p = open_container(bytes, kWeightMagic, source);
  ModelWeights w;
  if (!p.header.contains("arch")) throw FormatError(source + ": header lacks 'arch'");
  w.arch = arch_from_json(p.header.at("arch"), source);
  try {
    w.arch.validate();
  } catch (const ContractError& e) {
    throw FormatError(source + ": invalid architecture: " + e.what());
  }
  const auto fingerprint = field<std::string>(p.header, "fingerprint", source);
  if (fingerprint != w.arch.fingerprint()) {
    throw FormatError(source + ": fingerprint '" + fingerprint + "' does not match the architecture '" +
                      w.arch.fingerprint() + "'");
  }
  w.training_seed = field<std::uint64_t>(p.header, "training_seed", source);
  w.adversarially_trained = field<bool>(p.header, "adversarially_trained", source);

  const ModelWeights layout = init_model(w.arch, 0);
  const auto tensors = field<json>(p.header, "tensors", source);
  if (!tensors.is_array() || tensors.size() != layout.tensors.size()) {
    throw FormatError(source + ": expected " + std::to_string(layout.tensors.size()) + " tensors");
  }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto name = field<std::string>(tensors[i], "name", source);
    const auto shape = field<Shape>(tensors[i], "shape", source);
    if (name != layout.tensors[i].name || shape != layout.tensors[i].value.shape()) {
      throw FormatError(source + ": tensor " + std::to_string(i) + " is " + name + shape_string(shape) +
                        ", expected " + layout.tensors[i].name + shape_string(layout.tensors[i].value.shape()));
    }
    expected += shape_size(shape) * 8;
  }
  check_body(p.body, expected, source);

  std::size_t offset = 0;
  for (const NamedTensor& t : layout.tensors) {
    Tensor value(t.value.shape());
    for (double& v : value.data()) {
      v = std::bit_cast<double>(get_le<std::uint64_t>(p.body, offset));
      offset += 8;
      if (!std::isfinite(v)) throw FormatError(source + ": non-finite value in " + t.name);
    }
    w.tensors.push_back({t.name, std::move(value)});
  }
  return w;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PathError("failed writing '" + path.string() + "'");
}

void save_raster(const std::filesystem::path& path, const LabeledDataset& data, bool with_labels) {
  write_file(path, encode_raster(data, with_labels));
}

LabeledDataset load_raster(const std::filesystem::path& path) { return decode_raster(read_file(path), path.string()); }

void save_weights(const std::filesystem::path& path, const ModelWeights& weights) {
  write_file(path, encode_weights(weights));
}

ModelWeights load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path), path.string()); }

std::string content_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(bytes)));
  return buf;
}

}  // namespace advrand

#include "advrand/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "advrand/errors.hpp"
#include "advrand/image_ops.hpp"
#include "advrand/rng.hpp"

namespace advrand {

void LabeledDataset::validate(std::size_t num_classes) const {
  if (images.size() != labels.size()) {
    throw ContractError("dataset has " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& im = images[i];
    if (im.rank() != 3) throw DimensionError("dataset image " + std::to_string(i) + " is not H x W x C");
    if (im.shape() != images.front().shape()) {
      throw DimensionError("dataset image " + std::to_string(i) + " has shape " + shape_string(im.shape()) +
                           ", expected " + shape_string(images.front().shape()));
    }
    if (im.min() < 0.0 || im.max() > 1.0) {
      throw ContractError("dataset image " + std::to_string(i) + " has pixels outside [0, 1]");
    }
    if (labels[i] >= num_classes) {
      throw ContractError("dataset label " + std::to_string(labels[i]) + " at " + std::to_string(i) +
                          " is not below " + std::to_string(num_classes));
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.split = split;
  out.images.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= images.size()) throw IndexError("subset index " + std::to_string(i) + " out of range");
    out.images.push_back(images[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

Image quantize_f32(const Image& image) {
  Image out = image;
  for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

LabeledDataset resize_dataset(const LabeledDataset& data, std::size_t side) {
  LabeledDataset out = data;
  for (Image& im : out.images) im = quantize_f32(resize_bilinear(im, side, side));
  return out;
}

namespace {

struct Vec2 {
  double x, y;
};

double length(Vec2 v) { return std::hypot(v.x, v.y); }

double box_sdf(Vec2 p, Vec2 half) {
  const double qx = std::abs(p.x) - half.x, qy = std::abs(p.y) - half.y;
  return length({std::max(qx, 0.0), std::max(qy, 0.0)}) + std::min(std::max(qx, qy), 0.0);
}

double segment_sdf(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 pa{p.x - a.x, p.y - a.y}, ba{b.x - a.x, b.y - a.y};
  const double h = std::clamp((pa.x * ba.x + pa.y * ba.y) / (ba.x * ba.x + ba.y * ba.y), 0.0, 1.0);
  return length({pa.x - ba.x * h, pa.y - ba.y * h});
}

struct ShapeParams {
  Vec2 centre;
  double size;
  double thickness;
};

// Signed distance (negative inside) from p to the shape of class `label`.
double shape_sdf(std::uint32_t label, Vec2 p, const ShapeParams& s) {
  const Vec2 q{p.x - s.centre.x, p.y - s.centre.y};
  const double r = s.size, t = s.thickness;
  const double arm = 0.8 * r;
  auto diag = [&] { return segment_sdf(q, {-arm, arm}, {arm, -arm}) - 0.5 * t; };
  auto anti = [&] { return segment_sdf(q, {-arm, -arm}, {arm, arm}) - 0.5 * t; };
  auto hbar = [&](double half_t) { return box_sdf(q, {r, half_t}); };
  auto vbar = [&](double half_t) { return box_sdf(q, {half_t, r}); };
  switch (label) {
    case 0: return length(q) - r;
    case 1: return std::abs(length(q) - r) - 0.5 * t;
    case 2: return box_sdf(q, {0.85 * r, 0.85 * r});
    case 3: return std::abs(box_sdf(q, {0.85 * r, 0.85 * r})) - 0.5 * t;
    case 4: return hbar(0.9 * t);
    case 5: return vbar(0.9 * t);
    case 6: return diag();
    case 7: return anti();
    case 8: return std::min(hbar(0.5 * t), vbar(0.5 * t));
    default: return std::min(diag(), anti());
  }
}

std::array<double, 3> hsv_colour(double h, double s, double v) {
  const double hp = h * 6.0;
  const int sector = std::min(5, static_cast<int>(hp));
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = v - c;
  std::array<double, 3> rgb{};
  switch (sector) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  for (double& ch : rgb) ch += m;
  return rgb;
}

Image render(std::uint32_t label, const SyntheticSpec& spec, Rng& rng) {
  const double side = static_cast<double>(spec.side);
  ShapeParams s;
  s.centre = {rng.uniform(0.38 * side, 0.62 * side), rng.uniform(0.38 * side, 0.62 * side)};
  s.size = rng.uniform(0.2 * side, 0.32 * side);
  s.thickness = rng.uniform(1.6, 2.6) * side / 28.0;

  std::array<double, 3> fg = hsv_colour(rng.uniform(), rng.uniform(0.5, 1.0), rng.uniform(0.7, 1.0));
  std::array<double, 3> bg{rng.uniform(0.0, 0.25), rng.uniform(0.0, 0.25), rng.uniform(0.0, 0.25)};
  if (spec.channels == 1) fg[0] = std::max({fg[0], fg[1], fg[2]});

  const std::size_t C = spec.channels;
  Image im({spec.side, spec.side, C});
  for (std::size_t y = 0; y < spec.side; ++y)
    for (std::size_t x = 0; x < spec.side; ++x) {
      const double cover = std::clamp(0.5 - shape_sdf(label, {x + 0.5, y + 0.5}, s), 0.0, 1.0);
      for (std::size_t c = 0; c < C; ++c) {
        const double px = bg[c] + (fg[c] - bg[c]) * cover + rng.uniform(-spec.noise, spec.noise);
        im.at(y, x, c) = static_cast<float>(std::clamp(px, 0.0, 1.0));
      }
    }
  return im;
}

LabeledDataset make_split(const SyntheticSpec& spec, std::size_t count, const char* split) {
  LabeledDataset ds;
  ds.split = split;
  ds.images.reserve(count);
  ds.labels.reserve(count);
  const std::uint64_t split_id = hash_string(split);
  for (std::size_t i = 0; i < count; ++i) {
    const auto label = static_cast<std::uint32_t>(i % SyntheticSpec::kNumClasses);
    Rng rng(derive_seed({spec.seed, split_id, i}));
    ds.images.push_back(render(label, spec, rng));
    ds.labels.push_back(label);
  }
  return ds;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.channels != 1 && spec.channels != 3) throw ContractError("synthetic data supports 1 or 3 channels");
  if (spec.side < 8) throw ContractError("synthetic image side must be at least 8");
  return {make_split(spec, spec.train_count, "train"), make_split(spec, spec.test_count, "test")};
}

}  // namespace advrand

#pragma once

// Independent checks shared by the unit tests and the acceptance binary.
// Each returns one Outcome per checked item; nothing here calls gtest.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "advrand/attacks.hpp"
#include "advrand/rng.hpp"
#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

namespace oracles {

using advrand::Tensor;
using advrand::Var;

struct Outcome {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // largest error seen, in the check's own unit
  std::string detail;
};

bool all_pass(const std::vector<Outcome>& outcomes);
/// First failing outcome's name and detail, or "".
std::string first_failure(const std::vector<Outcome>& outcomes);

// ---- finite differences ----

/// Builds a value on the tape from leaf inputs. The checker contracts the
/// output with a fixed random tensor, so any output shape works.
using OpFn = std::function<Var(advrand::Tape&, const std::vector<Var>&)>;
using InputGen = std::function<std::vector<Tensor>(advrand::Rng&)>;

/// ||analytic - central difference|| / max(||analytic||, ||numeric||) over
/// every coordinate of every input (or `max_coords` sampled coordinates
/// per input when nonzero).
double gradient_relative_error(const OpFn& op, const std::vector<Tensor>& inputs, advrand::Rng& rng,
                               double step = 1e-6, std::size_t max_coords = 0);

/// `instances` random draws; passes when every error is <= tolerance.
Outcome check_gradient(const std::string& name, const InputGen& gen, const OpFn& op, std::size_t instances,
                       std::uint64_t seed, double tolerance = 1e-4, std::size_t max_coords = 0);

/// Every differentiable op plus the model, model-after-pattern and
/// ensemble-loss composites.
std::vector<Outcome> gradient_suite(std::size_t instances = 20, std::uint64_t seed = 1);

// ---- pattern counting ----

/// Counts (rnd, left, top) placements by enumerating every candidate.
std::uint64_t brute_force_pattern_count(std::size_t resize_min, std::size_t resize_max_exclusive,
                                        std::size_t pad_target);
/// Literature values plus agreement with brute force for all T <= max_side.
std::vector<Outcome> pattern_count_checks(std::size_t max_side = 40);

// ---- attacks ----

/// Logits W^T x + b of a linear model on a flattened image; W is
/// [pixels x classes].
advrand::LogitsFn linear_logits(const Tensor& weights, const Tensor& bias);

/// Smallest L2 distance from x to a point in [0,1]^2 that a linear model on a
/// 2-pixel image does not assign to `true_class`, by exhaustive grid search
/// at the given resolution. Infinity when no grid point qualifies.
double grid_min_distortion(const Tensor& weights, const Tensor& bias, const Tensor& x, std::size_t true_class,
                           std::size_t resolution);

std::vector<Outcome> fgsm_checks(std::uint64_t seed = 5);
std::vector<Outcome> deepfool_checks(std::uint64_t seed = 6);
std::vector<Outcome> cw_checks(std::uint64_t seed = 7);

// ---- score ----

std::vector<Outcome> score_checks(std::uint64_t seed = 8);

}  // namespace oracles

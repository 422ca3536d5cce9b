#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "advrand/dataset.hpp"
#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

namespace advrand {

/// Differentiable image -> logits map recorded on the caller's tape.
using LogitsFn = std::function<Var(Tape&, const Var&)>;

/// What an attacker differentiates through: one logits map, or an ensemble
/// whose attack losses are averaged over members. An ensemble counts as
/// fooled only when every member misclassifies.
class TargetModel {
 public:
  static TargetModel single(LogitsFn fn);
  static TargetModel ensemble(std::vector<LogitsFn> members);

  bool is_ensemble() const noexcept { return ensemble_; }
  std::size_t member_count() const noexcept { return members_.size(); }

  /// Logits of every member for `image`, recorded on `tape`.
  std::vector<Var> logits(Tape& tape, const Var& image) const;
  /// Per-member top-1 predictions.
  std::vector<std::size_t> predict_each(const Tensor& image) const;
  bool fooled(const Tensor& image, std::size_t true_class) const;

 private:
  std::vector<LogitsFn> members_;
  bool ensemble_ = false;
};

enum class AttackKind { FGSM, DeepFool, CW };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& text);

struct AttackConfig {
  AttackKind kind = AttackKind::FGSM;
  double epsilon = 2.0 / 255.0;
  std::size_t max_iter = 50;
  double overshoot = 0.02;
  double c = 1.0;
  double k = 0.0;
  double lr = 0.01;
  std::uint64_t seed = 0;

  static AttackConfig fgsm(double epsilon);
  static AttackConfig deepfool(std::size_t max_iter = 50, double overshoot = 0.02);
  static AttackConfig cw(double c = 1.0, double k = 0.0, std::size_t max_iter = 200, double lr = 0.01);

  /// Throws ContractError naming the offending field.
  void validate() const;
  /// Short stable label, e.g. "fgsm-eps5" or "cw".
  std::string id() const;
  /// Every field, in a fixed textual form (used for hashing and echoes).
  std::string canonical() const;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct AttackResult {
  Image adversarial;
  Tensor perturbation;  // adversarial - clean, exactly
  bool success = false;
  std::size_t iterations_used = 0;
  double perturbation_l2 = 0.0;
  double perturbation_linf = 0.0;
  std::string error;  // non-empty when the attack aborted on this image
};

/// x + eps * sign(grad of the mean cross-entropy), clipped to [0, 1].
AttackResult fgsm(const TargetModel& target, const Image& image, std::size_t true_class, double epsilon);

/// Multiclass L2 DeepFool on the member-averaged logits. The result is
/// clipped to [0, 1].
AttackResult deepfool(const TargetModel& target, const Image& image, std::size_t true_class, std::size_t max_iter,
                      double overshoot);

/// DeepFool without the final clip; returns the accumulated step r_tot
/// scaled by (1 + overshoot). Exposed for checks against linear models.
Tensor deepfool_perturbation(const TargetModel& target, const Image& image, std::size_t true_class,
                             std::size_t max_iter, double overshoot, std::size_t* iterations = nullptr);

/// Called with (iteration, current image) for every C&W iterate.
using CwObserver = std::function<void(std::size_t, const Tensor&)>;

/// Carlini-Wagner L2 with fixed c and plain gradient descent on w, where the
/// image is 0.5 * (tanh(w) + 1).
AttackResult cw_l2(const TargetModel& target, const Image& image, std::size_t true_class, double c, double k,
                   std::size_t max_iter, double lr, const CwObserver& observer = {});

/// Dispatches on config.kind.
AttackResult run_attack(const AttackConfig& config, const TargetModel& target, const Image& image,
                        std::size_t true_class);

/// Attacks every image. Per-image Errors are caught and recorded in
/// AttackResult::error (the image is then left unperturbed). Output order
/// and values do not depend on `workers`.
std::vector<AttackResult> attack_batch(const AttackConfig& config, const TargetModel& target,
                                       const LabeledDataset& data, std::size_t workers = 1);

}  // namespace advrand

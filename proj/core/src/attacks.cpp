#include "advrand/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "advrand/errors.hpp"
#include "advrand/ops.hpp"
#include "advrand/parallel.hpp"

namespace advrand {

TargetModel TargetModel::single(LogitsFn fn) {
  TargetModel t;
  t.members_.push_back(std::move(fn));
  return t;
}

TargetModel TargetModel::ensemble(std::vector<LogitsFn> members) {
  if (members.empty()) throw ContractError("an ensemble target needs at least one member");
  TargetModel t;
  t.members_ = std::move(members);
  t.ensemble_ = true;
  return t;
}

std::vector<Var> TargetModel::logits(Tape& tape, const Var& image) const {
  if (members_.empty()) throw ContractError("target model has no logits function");
  std::vector<Var> out;
  out.reserve(members_.size());
  for (const LogitsFn& fn : members_) out.push_back(fn(tape, image));
  return out;
}

std::vector<std::size_t> TargetModel::predict_each(const Tensor& image) const {
  Tape tape;
  std::vector<std::size_t> out;
  for (const Var& z : logits(tape, tape.constant(image))) out.push_back(argmax(z.value()));
  return out;
}

bool TargetModel::fooled(const Tensor& image, std::size_t true_class) const {
  for (std::size_t p : predict_each(image))
    if (p == true_class) return false;
  return true;
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::FGSM: return "fgsm";
    case AttackKind::DeepFool: return "deepfool";
    case AttackKind::CW: return "cw";
  }
  return "?";
}

AttackKind parse_attack_kind(const std::string& text) {
  if (text == "fgsm") return AttackKind::FGSM;
  if (text == "deepfool") return AttackKind::DeepFool;
  if (text == "cw" || text == "cw_l2") return AttackKind::CW;
  throw ContractError("unknown attack kind '" + text + "' (expected fgsm, deepfool or cw)");
}

AttackConfig AttackConfig::fgsm(double epsilon) {
  AttackConfig c;
  c.kind = AttackKind::FGSM;
  c.epsilon = epsilon;
  return c;
}

AttackConfig AttackConfig::deepfool(std::size_t max_iter, double overshoot) {
  AttackConfig c;
  c.kind = AttackKind::DeepFool;
  c.max_iter = max_iter;
  c.overshoot = overshoot;
  return c;
}

AttackConfig AttackConfig::cw(double c, double k, std::size_t max_iter, double lr) {
  AttackConfig a;
  a.kind = AttackKind::CW;
  a.c = c;
  a.k = k;
  a.max_iter = max_iter;
  a.lr = lr;
  return a;
}

void AttackConfig::validate() const {
  switch (kind) {
    case AttackKind::FGSM:
      if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ContractError("attack epsilon must lie in [0, 1)");
      break;
    case AttackKind::DeepFool:
      if (max_iter == 0) throw ContractError("attack max_iter must be positive");
      if (!(overshoot >= 0.0)) throw ContractError("attack overshoot must be >= 0");
      break;
    case AttackKind::CW:
      if (max_iter == 0) throw ContractError("attack max_iter must be positive");
      if (!(c > 0.0)) throw ContractError("attack c must be > 0");
      if (!(k >= 0.0)) throw ContractError("attack k must be >= 0");
      if (!(lr > 0.0)) throw ContractError("attack lr must be > 0");
      break;
  }
}

std::string AttackConfig::id() const {
  if (kind != AttackKind::FGSM) return to_string(kind);
  const double levels = epsilon * 255.0;
  char buf[64];
  if (std::abs(levels - std::round(levels)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "fgsm-eps%.0f", levels);
  } else {
    std::snprintf(buf, sizeof buf, "fgsm-eps%.6g", epsilon);
  }
  return buf;
}

std::string AttackConfig::canonical() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "kind=%s;epsilon=%.17g;max_iter=%zu;overshoot=%.17g;c=%.17g;k=%.17g;lr=%.17g;seed=%llu",
                to_string(kind).c_str(), epsilon, max_iter, overshoot, c, k, lr,
                static_cast<unsigned long long>(seed));
  return buf;
}

namespace {

void check_image(const Image& image, const char* who) {
  if (image.rank() != 3) throw DimensionError(std::string(who) + ": expected an H x W x C image");
  if (!image.all_finite() || image.min() < 0.0 || image.max() > 1.0) {
    throw ContractError(std::string(who) + ": image pixels must lie in [0, 1]");
  }
}

Var mean_of(const std::vector<Var>& terms) {
  Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  return mul_scalar(total, 1.0 / static_cast<double>(terms.size()));
}

double norm2(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

// Builds the result so that adversarial == clean + perturbation holds
// bit-exactly, with |perturbation| <= bound and adversarial in [0, 1].
AttackResult finalize(const Image& clean, const Image& adv, double bound) {
  AttackResult r;
  r.adversarial = Image(clean.shape());
  r.perturbation = Tensor(clean.shape());
  double l2 = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    double d = std::clamp(adv[i] - clean[i], -bound, bound);
    double a = clean[i] + d;
    while (a < 0.0 || a > 1.0 || std::abs(d) > bound) {
      d = std::nextafter(d, 0.0);
      a = clean[i] + d;
    }
    r.adversarial[i] = a;
    r.perturbation[i] = d;
    l2 += d * d;
    linf = std::max(linf, std::abs(d));
  }
  r.perturbation_l2 = std::sqrt(l2);
  r.perturbation_linf = linf;
  return r;
}

// Nearest float32 image strictly inside (0, 1).
Image quantize_open(const Tensor& x) {
  Image q(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    float f = static_cast<float>(x[i]);
    if (f <= 0.0f) f = std::nextafter(0.0f, 1.0f);
    if (f >= 1.0f) f = std::nextafter(1.0f, 0.0f);
    q[i] = f;
  }
  return q;
}

}  // namespace

AttackResult fgsm(const TargetModel& target, const Image& image, std::size_t true_class, double epsilon) {
  check_image(image, "fgsm");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ContractError("fgsm: epsilon must lie in [0, 1)");
  Tape tape;
  Var x = tape.variable(image);
  std::vector<Var> losses;
  for (const Var& z : target.logits(tape, x)) losses.push_back(softmax_cross_entropy(z, true_class));
  const Tensor g = tape.backward(mean_of(losses)).of(x);
  if (!g.all_finite()) throw NumericError("fgsm: non-finite input gradient");

  Image adv(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
    adv[i] = std::clamp(image[i] + epsilon * s, 0.0, 1.0);
  }
  AttackResult r = finalize(image, adv, epsilon);
  r.iterations_used = 1;
  r.success = target.fooled(r.adversarial, true_class);
  return r;
}

namespace {

struct DeepFoolRun {
  Tensor r_tot;
  std::size_t iterations = 0;
  bool fooled = false;
};

DeepFoolRun run_deepfool(const TargetModel& target, const Image& image, std::size_t true_class,
                         std::size_t max_iter, double overshoot, bool clip) {
  DeepFoolRun run{Tensor::zeros(image.shape())};
  auto point = [&] {
    Image x(image.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = image[i] + (1.0 + overshoot) * run.r_tot[i];
      x[i] = clip ? std::clamp(v, 0.0, 1.0) : v;
    }
    return x;
  };
  if (target.fooled(image, true_class)) {
    run.fooled = true;
    return run;
  }
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Tape tape;
    Var x = tape.variable(point());
    Var z = mean_of(target.logits(tape, x));
    const Tensor& zv = z.value();
    if (true_class >= zv.size()) throw IndexError("deepfool: class index out of range");

    double best = std::numeric_limits<double>::infinity();
    double best_scale = 0.0;
    Tensor best_w;
    for (std::size_t i = 0; i < zv.size(); ++i) {
      if (i == true_class) continue;
      Tensor seed = Tensor::zeros(zv.shape());
      seed[i] = 1.0;
      seed[true_class] = -1.0;
      Tensor w = tape.backward(z, seed).of(x);
      if (!w.all_finite()) throw NumericError("deepfool: non-finite gradient");
      if (clip) {
        // Pixels pinned at a bound cannot move further out; stepping along
        // those components would be clipped away and stall the search.
        const Tensor& xv = x.value();
        for (std::size_t j = 0; j < w.size(); ++j)
          if ((xv[j] >= 1.0 && w[j] > 0.0) || (xv[j] <= 0.0 && w[j] < 0.0)) w[j] = 0.0;
      }
      const double f = std::abs(zv[i] - zv[true_class]);
      const double wn = norm2(w);
      if (wn == 0.0) continue;
      if (f / wn < best) {
        best = f / wn;
        best_scale = f / (wn * wn);
        best_w = std::move(w);
      }
    }
    if (!std::isfinite(best)) break;  // flat in every direction
    for (std::size_t i = 0; i < run.r_tot.size(); ++i) run.r_tot[i] += best_scale * best_w[i];
    run.iterations = it;
    if (target.fooled(clip ? quantize_f32(point()) : point(), true_class)) {
      run.fooled = true;
      break;
    }
  }
  for (double& v : run.r_tot.data()) v *= 1.0 + overshoot;
  return run;
}

}  // namespace

Tensor deepfool_perturbation(const TargetModel& target, const Image& image, std::size_t true_class,
                             std::size_t max_iter, double overshoot, std::size_t* iterations) {
  if (!(overshoot >= 0.0)) throw ContractError("deepfool: overshoot must be >= 0");
  DeepFoolRun run = run_deepfool(target, image, true_class, max_iter, overshoot, false);
  if (iterations) *iterations = run.iterations;
  return run.r_tot;
}

AttackResult deepfool(const TargetModel& target, const Image& image, std::size_t true_class, std::size_t max_iter,
                      double overshoot) {
  check_image(image, "deepfool");
  if (!(overshoot >= 0.0)) throw ContractError("deepfool: overshoot must be >= 0");
  DeepFoolRun run = run_deepfool(target, image, true_class, max_iter, overshoot, true);
  Image adv(image.shape());
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = std::clamp(image[i] + run.r_tot[i], 0.0, 1.0);
  AttackResult r = finalize(image, adv, std::numeric_limits<double>::infinity());
  r.iterations_used = run.iterations;
  r.success = run.iterations == 0 ? run.fooled : target.fooled(r.adversarial, true_class);
  return r;
}

AttackResult cw_l2(const TargetModel& target, const Image& image, std::size_t true_class, double c, double k,
                   std::size_t max_iter, double lr, const CwObserver& observer) {
  check_image(image, "cw_l2");
  if (!(c > 0.0) || !(k >= 0.0) || !(lr > 0.0)) throw ContractError("cw_l2: need c > 0, k >= 0, lr > 0");
  constexpr double kInset = 1e-6;

  Tensor w(image.shape());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::atanh(2.0 * std::clamp(image[i], kInset, 1.0 - kInset) - 1.0);

  std::optional<Image> best;
  double best_dist = std::numeric_limits<double>::infinity();
  Image last;
  for (std::size_t it = 0;; ++it) {
    Tape tape;
    Var wv = tape.variable(w);
    Var xa = mul_scalar(add_scalar(tanh(wv), 1.0), 0.5);
    Var dist = sum(square(sub(xa, tape.constant(image))));
    std::vector<Var> margins;
    bool fooled_here = true;
    for (const Var& z : target.logits(tape, xa)) {
      fooled_here = fooled_here && argmax(z.value()) != true_class;
      Var gap = sub(select(z, true_class), max_excluding(z, true_class));
      margins.push_back(add_scalar(relu(add_scalar(gap, k)), -k));
    }
    Var loss = add(dist, mul_scalar(mean_of(margins), c));
    if (!std::isfinite(loss.value().item())) throw NumericError("cw_l2: non-finite loss");
    if (observer) observer(it, xa.value());

    Image q = quantize_open(xa.value());
    if (fooled_here && target.fooled(q, true_class)) {
      double d = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) d += (q[i] - image[i]) * (q[i] - image[i]);
      if (d < best_dist) {
        best_dist = d;
        best = q;
      }
    }
    if (it == max_iter) {
      last = std::move(q);
      break;
    }
    const Tensor g = tape.backward(loss).of(wv);
    if (!g.all_finite()) throw NumericError("cw_l2: non-finite gradient");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }

  AttackResult r = finalize(image, best ? *best : last, std::numeric_limits<double>::infinity());
  r.iterations_used = max_iter;
  r.success = best.has_value();
  return r;
}

AttackResult run_attack(const AttackConfig& config, const TargetModel& target, const Image& image,
                        std::size_t true_class) {
  config.validate();
  switch (config.kind) {
    case AttackKind::FGSM: return fgsm(target, image, true_class, config.epsilon);
    case AttackKind::DeepFool: return deepfool(target, image, true_class, config.max_iter, config.overshoot);
    case AttackKind::CW: return cw_l2(target, image, true_class, config.c, config.k, config.max_iter, config.lr);
  }
  throw ContractError("unknown attack kind");
}

std::vector<AttackResult> attack_batch(const AttackConfig& config, const TargetModel& target,
                                       const LabeledDataset& data, std::size_t workers) {
  config.validate();
  std::vector<AttackResult> results(data.size());
  parallel_for(data.size(), workers, [&](std::size_t i) {
    try {
      results[i] = run_attack(config, target, data.images[i], data.labels[i]);
    } catch (const Error& e) {
      AttackResult failed;
      failed.adversarial = data.images[i];
      failed.perturbation = Tensor::zeros(data.images[i].shape());
      failed.error = e.what();
      results[i] = std::move(failed);
    }
  });
  return results;
}

}  // namespace advrand

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "advrand/tensor.hpp"

namespace advrand {

class Tape;
class BackwardContext;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Adjoints produced by one backward pass, indexed by Var.
class Gradients {
 public:
  /// Gradient of the output w.r.t. `v`; a zero tensor when `v` is not on a
  /// path to the output.
  Tensor of(const Var& v) const;
  bool reached(const Var& v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
};

/// Wengert list for one computation. Operations append nodes in execution
/// order; backward() walks them in reverse. Intended to be created per
/// forward pass and dropped once the gradients are read.
class Tape {
 public:
  using BackwardFn = std::function<void(BackwardContext&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf whose gradient is wanted.
  Var variable(Tensor value);
  /// Leaf treated as a constant; no gradient flows into it.
  Var constant(Tensor value);

  /// Records an op result. `backward` is dropped when no parent requires a
  /// gradient, so constant-only subgraphs cost nothing at backward time.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);

  /// Reverse pass from a scalar output (seed 1).
  Gradients backward(const Var& output) const;
  /// Vector-Jacobian product: reverse pass with an explicit output adjoint.
  /// The tape is left intact, so several seeds can be pushed through one
  /// forward pass.
  Gradients backward(const Var& output, const Tensor& seed) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  friend class Var;
  friend class BackwardContext;

  struct Node {
    Tensor value;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn backward);
  void check_owner(const Var& v) const;

  std::vector<Node> nodes_;
};

/// View handed to an op's backward function.
class BackwardContext {
 public:
  const Tensor& grad_output() const { return *grad_out_; }
  const Tensor& value(const Var& v) const { return tape_->nodes_[v.id()].value; }
  bool wants(const Var& v) const { return tape_->nodes_[v.id()].requires_grad; }
  /// Accumulator for the adjoint of `v`, zero-initialised on first access.
  Tensor& grad(const Var& v);

 private:
  friend class Tape;
  BackwardContext(const Tape* tape, std::vector<Tensor>* grads) : tape_(tape), grads_(grads) {}

  const Tape* tape_;
  std::vector<Tensor>* grads_;
  const Tensor* grad_out_ = nullptr;
};

}  // namespace advrand

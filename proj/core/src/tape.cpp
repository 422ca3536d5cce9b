#include "advrand/tape.hpp"

#include "advrand/errors.hpp"

namespace advrand {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->nodes_[id_].value;
}

bool Var::requires_grad() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->nodes_[id_].requires_grad;
}

Tensor Gradients::of(const Var& v) const {
  if (v.id() < grads_.size() && !grads_[v.id()].empty()) return grads_[v.id()];
  return Tensor::zeros(v.shape());
}

bool Gradients::reached(const Var& v) const { return v.id() < grads_.size() && !grads_[v.id()].empty(); }

Var Tape::push(Tensor value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), requires_grad, std::move(backward)});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check_owner(const Var& v) const {
  if (!v.valid() || &v.tape() != this) throw ContractError("Var belongs to a different tape");
}

Var Tape::variable(Tensor value) { return push(std::move(value), true, nullptr); }

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    check_owner(p);
    needs = needs || nodes_[p.id()].requires_grad;
  }
  return push(std::move(value), needs, needs ? std::move(backward) : nullptr);
}

Gradients Tape::backward(const Var& output) const {
  check_owner(output);
  if (output.value().size() != 1) {
    throw ContractError("backward() needs a scalar output, got shape " + shape_string(output.shape()));
  }
  return backward(output, Tensor::full(output.shape(), 1.0));
}

Gradients Tape::backward(const Var& output, const Tensor& seed) const {
  check_owner(output);
  require_same_shape(output.value(), seed, "backward seed");

  Gradients result;
  result.grads_.resize(output.id() + 1);
  if (!nodes_[output.id()].requires_grad) return result;

  result.grads_[output.id()] = seed;
  BackwardContext ctx(this, &result.grads_);
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.backward || result.grads_[i].empty()) continue;
    // Copy: the op may allocate adjoints for lower ids, which never alias i,
    // but holding a reference into the vector across that is fragile.
    const Tensor grad_out = result.grads_[i];
    ctx.grad_out_ = &grad_out;
    node.backward(ctx);
  }
  return result;
}

Tensor& BackwardContext::grad(const Var& v) {
  Tensor& g = (*grads_)[v.id()];
  if (g.empty()) g = Tensor::zeros(value(v).shape());
  return g;
}

}  // namespace advrand

#pragma once

#include <cstddef>

#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

// Differentiable operations on tape values. None of them broadcast: operand
// shapes must agree exactly, and any shape adaptation goes through reshape()
// or tile(). Shape violations raise DimensionError.
namespace advrand {

/// [m x k] x [k x n] -> [m x n].
Var matmul(const Var& a, const Var& b);

/// Valid cross-correlation (no kernel flip) of an H x W x Cin image with a
/// kh x kw x Cin x Cout kernel bank. Output side is (H - kh) / stride + 1.
Var conv2d(const Var& x, const Var& kernels, std::size_t stride = 1);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product.
Var mul(const Var& a, const Var& b);
Var mul_scalar(const Var& a, double s);
Var add_scalar(const Var& a, double s);

Var relu(const Var& a);
Var tanh(const Var& a);
/// sign(0) = 0. Zero gradient everywhere.
Var sign(const Var& a);
/// Identity gradient on [lo, hi] (inclusive), zero outside.
Var clamp(const Var& a, double lo, double hi);
Var square(const Var& a);
/// Requires a >= 0 (NumericError otherwise). The gradient at exactly 0 is
/// taken as 0 rather than +inf.
Var sqrt(const Var& a);

/// Sum / mean of all elements as a rank-0 scalar.
Var sum(const Var& a);
Var mean(const Var& a);

Var reshape(const Var& a, Shape shape);
/// Stacks `count` copies of `a` along a new leading axis.
Var tile(const Var& a, std::size_t count);

/// Element `index` of a rank-1 tensor as a scalar.
Var select(const Var& a, std::size_t index);
/// max_{j != index} a[j] for a rank-1 tensor of length >= 2. The gradient
/// goes to the lowest maximising index.
Var max_excluding(const Var& a, std::size_t index);

/// H x W x C -> C, averaging over the spatial positions.
Var global_avg_pool(const Var& x);

/// -log softmax(logits)[true_class] for rank-1 logits, computed with max
/// subtraction so large logits do not overflow.
Var softmax_cross_entropy(const Var& logits, std::size_t true_class);

// Plain-tensor helpers that do not touch a tape.
Tensor softmax(const Tensor& logits);
/// Index of the largest element; ties go to the lowest index.
std::size_t argmax(const Tensor& t);

}  // namespace advrand

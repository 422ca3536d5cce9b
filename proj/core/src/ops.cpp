#include "advrand/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "advrand/errors.hpp"

namespace advrand {
namespace {

void same_tape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands live on different tapes");
}

template <class Fn>
Tensor map(const Tensor& a, Fn fn) {
  Tensor out(a.shape());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

void axpy(Tensor& dst, const Tensor& src, double scale = 1.0) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                         shape_string(t.shape()));
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank(A, 2, "matmul");
  require_rank(B, 2, "matmul");
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  if (B.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(A.shape()) + " x " +
                         shape_string(B.shape()));
  }
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * B[p * n + j];
    }
  }
  return a.tape().record(std::move(out), {a, b}, [a, b, m, k, n](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    const Tensor& B = ctx.value(b);
    if (ctx.wants(a)) {
      Tensor& ga = ctx.grad(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (ctx.wants(b)) {
      Tensor& gb = ctx.grad(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * g[i * n + j];
        }
    }
  });
}

Var conv2d(const Var& x, const Var& kernels, std::size_t stride) {
  same_tape(x, kernels, "conv2d");
  const Tensor& X = x.value();
  const Tensor& K = kernels.value();
  require_rank(X, 3, "conv2d input");
  require_rank(K, 4, "conv2d kernels");
  if (stride == 0) throw ContractError("conv2d: stride must be positive");
  const std::size_t H = X.dim(0), W = X.dim(1), cin = X.dim(2);
  const std::size_t kh = K.dim(0), kw = K.dim(1), cout = K.dim(3);
  if (K.dim(2) != cin) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(K.dim(2)) + " input channels, image has " +
                         std::to_string(cin));
  }
  if (kh > H || kw > W) {
    throw DimensionError("conv2d: kernel " + shape_string(K.shape()) + " larger than input " +
                         shape_string(X.shape()));
  }
  const std::size_t Ho = (H - kh) / stride + 1, Wo = (W - kw) / stride + 1;

  Tensor out({Ho, Wo, cout});
  const double* xd = X.data().data();
  const double* kd = K.data().data();
  double* od = out.data().data();
  for (std::size_t oy = 0; oy < Ho; ++oy) {
    for (std::size_t ox = 0; ox < Wo; ++ox) {
      double* o = od + (oy * Wo + ox) * cout;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const double* xp = xd + ((oy * stride + ky) * W + (ox * stride + kx)) * cin;
          const double* kp = kd + (ky * kw + kx) * cin * cout;
          for (std::size_t ci = 0; ci < cin; ++ci) {
            const double xv = xp[ci];
            const double* kr = kp + ci * cout;
            for (std::size_t co = 0; co < cout; ++co) o[co] += xv * kr[co];
          }
        }
      }
    }
  }

  return x.tape().record(std::move(out), {x, kernels}, [=](BackwardContext& ctx) {
    const double* g = ctx.grad_output().data().data();
    const double* xd = ctx.value(x).data().data();
    const double* kd = ctx.value(kernels).data().data();
    double* gx = ctx.wants(x) ? ctx.grad(x).data().data() : nullptr;
    double* gk = ctx.wants(kernels) ? ctx.grad(kernels).data().data() : nullptr;
    for (std::size_t oy = 0; oy < Ho; ++oy) {
      for (std::size_t ox = 0; ox < Wo; ++ox) {
        const double* go = g + (oy * Wo + ox) * cout;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const std::size_t xoff = ((oy * stride + ky) * W + (ox * stride + kx)) * cin;
            const std::size_t koff = (ky * kw + kx) * cin * cout;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              if (gx) {
                const double* kr = kd + koff + ci * cout;
                double acc = 0.0;
                for (std::size_t co = 0; co < cout; ++co) acc += go[co] * kr[co];
                gx[xoff + ci] += acc;
              }
              if (gk) {
                const double xv = xd[xoff + ci];
                double* gr = gk + koff + ci * cout;
                for (std::size_t co = 0; co < cout; ++co) gr[co] += xv * go[co];
              }
            }
          }
        }
      }
    }
  });
}

Var add(const Var& a, const Var& b) {
  same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  axpy(out, b.value());
  return a.tape().record(std::move(out), {a, b}, [a, b](BackwardContext& ctx) {
    if (ctx.wants(a)) axpy(ctx.grad(a), ctx.grad_output());
    if (ctx.wants(b)) axpy(ctx.grad(b), ctx.grad_output());
  });
}

Var sub(const Var& a, const Var& b) {
  same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  axpy(out, b.value(), -1.0);
  return a.tape().record(std::move(out), {a, b}, [a, b](BackwardContext& ctx) {
    if (ctx.wants(a)) axpy(ctx.grad(a), ctx.grad_output());
    if (ctx.wants(b)) axpy(ctx.grad(b), ctx.grad_output(), -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    if (ctx.wants(a)) {
      Tensor& ga = ctx.grad(a);
      const Tensor& B = ctx.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
    }
    if (ctx.wants(b)) {
      Tensor& gb = ctx.grad(b);
      const Tensor& A = ctx.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
    }
  });
}

Var mul_scalar(const Var& a, double s) {
  Tensor out = map(a.value(), [s](double v) { return v * s; });
  return a.tape().record(std::move(out), {a}, [a, s](BackwardContext& ctx) { axpy(ctx.grad(a), ctx.grad_output(), s); });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = map(a.value(), [s](double v) { return v + s; });
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) { axpy(ctx.grad(a), ctx.grad_output()); });
}

Var relu(const Var& a) {
  Tensor out = map(a.value(), [](double v) { return v > 0.0 ? v : 0.0; });
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    Tensor& ga = ctx.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (A[i] > 0.0) ga[i] += g[i];
  });
}

Var tanh(const Var& a) {
  Tensor out = map(a.value(), [](double v) { return std::tanh(v); });
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    Tensor& ga = ctx.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = std::tanh(A[i]);
      ga[i] += g[i] * (1.0 - t * t);
    }
  });
}

Var sign(const Var& a) {
  Tensor out = map(a.value(), [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  return a.tape().record(std::move(out), {a}, [](BackwardContext&) {});
}

Var clamp(const Var& a, double lo, double hi) {
  if (!(lo <= hi)) throw ContractError("clamp: lo must not exceed hi");
  Tensor out = map(a.value(), [lo, hi](double v) { return std::clamp(v, lo, hi); });
  return a.tape().record(std::move(out), {a}, [a, lo, hi](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    Tensor& ga = ctx.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (A[i] >= lo && A[i] <= hi) ga[i] += g[i];
  });
}

Var square(const Var& a) {
  Tensor out = map(a.value(), [](double v) { return v * v; });
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    Tensor& ga = ctx.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * A[i] * g[i];
  });
}

Var sqrt(const Var& a) {
  for (double v : a.value().data()) {
    if (!(v >= 0.0)) throw NumericError("sqrt of negative or NaN value");
  }
  Tensor out = map(a.value(), [](double v) { return std::sqrt(v); });
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    const Tensor& A = ctx.value(a);
    Tensor& ga = ctx.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (A[i] > 0.0) ga[i] += g[i] / (2.0 * std::sqrt(A[i]));
  });
}

Var sum(const Var& a) {
  Tensor out = Tensor::scalar(a.value().sum());
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    const double g = ctx.grad_output()[0];
    for (double& v : ctx.grad(a).data()) v += g;
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  Tensor out = Tensor::scalar(a.value().sum() / n);
  return a.tape().record(std::move(out), {a}, [a, n](BackwardContext& ctx) {
    const double g = ctx.grad_output()[0] / n;
    for (double& v : ctx.grad(a).data()) v += g;
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.tape().record(std::move(out), {a}, [a](BackwardContext& ctx) {
    auto ga = ctx.grad(a).data();
    auto g = ctx.grad_output().data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Var tile(const Var& a, std::size_t count) {
  if (count == 0) throw DimensionError("tile: count must be positive");
  const Tensor& A = a.value();
  Shape shape{count};
  shape.insert(shape.end(), A.shape().begin(), A.shape().end());
  std::vector<double> data;
  data.reserve(count * A.size());
  for (std::size_t r = 0; r < count; ++r) data.insert(data.end(), A.values().begin(), A.values().end());
  const std::size_t n = A.size();
  return a.tape().record(Tensor(std::move(shape), std::move(data)), {a}, [a, count, n](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& ga = ctx.grad(a);
    for (std::size_t r = 0; r < count; ++r)
      for (std::size_t i = 0; i < n; ++i) ga[i] += g[r * n + i];
  });
}

Var select(const Var& a, std::size_t index) {
  require_rank(a.value(), 1, "select");
  if (index >= a.value().size()) {
    throw IndexError("select: index " + std::to_string(index) + " out of range for " +
                     shape_string(a.shape()));
  }
  return a.tape().record(Tensor::scalar(a.value()[index]), {a}, [a, index](BackwardContext& ctx) {
    ctx.grad(a)[index] += ctx.grad_output()[0];
  });
}

Var max_excluding(const Var& a, std::size_t index) {
  const Tensor& A = a.value();
  require_rank(A, 1, "max_excluding");
  if (A.size() < 2) throw DimensionError("max_excluding: need at least two elements");
  if (index >= A.size()) throw IndexError("max_excluding: index out of range");
  std::size_t best = index == 0 ? 1 : 0;
  for (std::size_t j = 0; j < A.size(); ++j)
    if (j != index && A[j] > A[best]) best = j;
  return a.tape().record(Tensor::scalar(A[best]), {a}, [a, best](BackwardContext& ctx) {
    ctx.grad(a)[best] += ctx.grad_output()[0];
  });
}

Var global_avg_pool(const Var& x) {
  const Tensor& X = x.value();
  require_rank(X, 3, "global_avg_pool");
  const std::size_t hw = X.dim(0) * X.dim(1), c = X.dim(2);
  Tensor out({c});
  for (std::size_t p = 0; p < hw; ++p)
    for (std::size_t ch = 0; ch < c; ++ch) out[ch] += X[p * c + ch];
  const double inv = 1.0 / static_cast<double>(hw);
  for (double& v : out.data()) v *= inv;
  return x.tape().record(std::move(out), {x}, [x, hw, c, inv](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad(x);
    for (std::size_t p = 0; p < hw; ++p)
      for (std::size_t ch = 0; ch < c; ++ch) gx[p * c + ch] += g[ch] * inv;
  });
}

Tensor softmax(const Tensor& logits) {
  const double m = logits.max();
  Tensor out(logits.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out.data()) v /= z;
  return out;
}

std::size_t argmax(const Tensor& t) {
  if (t.empty()) throw DimensionError("argmax of empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[best]) best = i;
  return best;
}

Var softmax_cross_entropy(const Var& logits, std::size_t true_class) {
  const Tensor& Z = logits.value();
  require_rank(Z, 1, "softmax_cross_entropy");
  if (true_class >= Z.size()) {
    throw IndexError("softmax_cross_entropy: class " + std::to_string(true_class) + " out of range for " +
                     std::to_string(Z.size()) + " logits");
  }
  const double m = Z.max();
  double z = 0.0;
  for (double v : Z.data()) z += std::exp(v - m);
  const double loss = std::log(z) + m - Z[true_class];
  return logits.tape().record(Tensor::scalar(loss), {logits}, [logits, true_class](BackwardContext& ctx) {
    const double g = ctx.grad_output()[0];
    const Tensor p = softmax(ctx.value(logits));
    Tensor& gz = ctx.grad(logits);
    for (std::size_t i = 0; i < p.size(); ++i) gz[i] += g * (p[i] - (i == true_class ? 1.0 : 0.0));
  });
}

}  // namespace advrand

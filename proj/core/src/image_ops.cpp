#include "advrand/image_ops.hpp"

#include <array>
#include <cmath>
#include <string>

#include "advrand/errors.hpp"
#include "advrand/ops.hpp"

namespace advrand {
namespace {

void require_image(const Tensor& t, const char* op) {
  if (t.rank() != 3) {
    throw DimensionError(std::string(op) + ": expected H x W x C image, got " + shape_string(t.shape()));
  }
}

void require_rgb(const Tensor& t, const char* op) {
  require_image(t, op);
  if (t.dim(2) != 3) {
    throw ContractError(std::string(op) + ": needs 3 colour channels, image has " + std::to_string(t.dim(2)));
  }
}

template <class Fn>
Tensor on_constant(const Tensor& image, Fn fn) {
  Tape tape;
  return fn(tape.constant(image)).value();
}

struct Tap {
  std::size_t i0, i1;
  double frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double hi = static_cast<double>(in - 1);
  for (std::size_t d = 0; d < out; ++d) {
    double src = (static_cast<double>(d) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, hi);
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    taps[d] = Tap{i0, std::min(i0 + 1, in - 1), src - static_cast<double>(i0)};
  }
  return taps;
}

// Forward-mode dual number carrying derivatives w.r.t. the three channels of
// one pixel; used to get exact per-pixel Jacobians of the HSV transforms.
struct Dual {
  double v = 0.0;
  std::array<double, 3> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant lift
  static Dual seed(double value, int k) {
    Dual x(value);
    x.d[k] = 1.0;
    return x;
  }
};

Dual operator+(Dual a, const Dual& b) {
  a.v += b.v;
  for (int k = 0; k < 3; ++k) a.d[k] += b.d[k];
  return a;
}
Dual operator-(Dual a, const Dual& b) {
  a.v -= b.v;
  for (int k = 0; k < 3; ++k) a.d[k] -= b.d[k];
  return a;
}
Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (int k = 0; k < 3; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return r;
}
Dual operator/(const Dual& a, const Dual& b) {
  Dual r(a.v / b.v);
  for (int k = 0; k < 3; ++k) r.d[k] = (a.d[k] * b.v - a.v * b.d[k]) / (b.v * b.v);
  return r;
}

double value_of(double x) { return x; }
double value_of(const Dual& x) { return x.v; }

template <class T>
T abs_of(const T& x) {
  return value_of(x) < 0.0 ? T(0.0) - x : x;
}

// x mod m for m > 0, result in [0, m).
template <class T>
T wrap(const T& x, double m) {
  return x - T(std::floor(value_of(x) / m) * m);
}

template <class T>
T clip01(const T& x) {
  if (value_of(x) < 0.0) return T(0.0);
  if (value_of(x) > 1.0) return T(1.0);
  return x;
}

template <class T>
struct Hsv {
  T h, s, v;
};

template <class T>
Hsv<T> rgb_to_hsv(const T& r, const T& g, const T& b) {
  const T* mx = &r;
  if (value_of(g) > value_of(*mx)) mx = &g;
  if (value_of(b) > value_of(*mx)) mx = &b;
  const T* mn = &r;
  if (value_of(g) < value_of(*mn)) mn = &g;
  if (value_of(b) < value_of(*mn)) mn = &b;
  const T v = *mx;
  const T chroma = *mx - *mn;
  if (value_of(chroma) <= 0.0) return {T(0.0), T(0.0), v};
  const T s = chroma / v;
  T h;
  if (mx == &r) {
    h = wrap((g - b) / chroma, 6.0);
  } else if (mx == &g) {
    h = (b - r) / chroma + T(2.0);
  } else {
    h = (r - g) / chroma + T(4.0);
  }
  return {h / T(6.0), s, v};
}

template <class T>
std::array<T, 3> hsv_to_rgb(const T& h, const T& s, const T& v) {
  const T chroma = v * s;
  const T hp = wrap(h, 1.0) * T(6.0);
  const int sector = std::min(5, static_cast<int>(std::floor(value_of(hp))));
  const T x = chroma * (T(1.0) - abs_of(wrap(hp, 2.0) - T(1.0)));
  const T m = v - chroma;
  const T zero(0.0);
  std::array<T, 3> rgb;
  switch (sector) {
    case 0: rgb = {chroma, x, zero}; break;
    case 1: rgb = {x, chroma, zero}; break;
    case 2: rgb = {zero, chroma, x}; break;
    case 3: rgb = {zero, x, chroma}; break;
    case 4: rgb = {x, zero, chroma}; break;
    default: rgb = {chroma, zero, x}; break;
  }
  for (T& c : rgb) c = c + m;
  return rgb;
}

template <class T>
std::array<T, 3> saturate_pixel(const T& r, const T& g, const T& b, double factor) {
  Hsv<T> hsv = rgb_to_hsv(r, g, b);
  return hsv_to_rgb(hsv.h, clip01(hsv.s * T(factor)), hsv.v);
}

template <class T>
std::array<T, 3> hue_pixel(const T& r, const T& g, const T& b, double shift) {
  Hsv<T> hsv = rgb_to_hsv(r, g, b);
  return hsv_to_rgb(wrap(hsv.h + T(shift), 1.0), hsv.s, hsv.v);
}

// Shared driver for the per-pixel HSV transforms.
template <class PixelFn>
Var per_pixel_rgb(const Var& image, const char* op, PixelFn fn) {
  const Tensor& X = image.value();
  require_rgb(X, op);
  const std::size_t n = X.dim(0) * X.dim(1);
  Tensor out(X.shape());
  for (std::size_t p = 0; p < n; ++p) {
    const auto rgb = fn(X[3 * p], X[3 * p + 1], X[3 * p + 2]);
    for (int c = 0; c < 3; ++c) out[3 * p + c] = rgb[c];
  }
  Var raw = image.tape().record(std::move(out), {image}, [image, n, fn](BackwardContext& ctx) {
    const Tensor& X = ctx.value(image);
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad(image);
    for (std::size_t p = 0; p < n; ++p) {
      const auto rgb = fn(Dual::seed(X[3 * p], 0), Dual::seed(X[3 * p + 1], 1), Dual::seed(X[3 * p + 2], 2));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gx[3 * p + j] += g[3 * p + i] * rgb[i].d[j];
    }
  });
  return clamp(raw, 0.0, 1.0);
}

}  // namespace

Var resize_bilinear(const Var& image, std::size_t out_h, std::size_t out_w) {
  const Tensor& X = image.value();
  require_image(X, "resize_bilinear");
  if (out_h == 0 || out_w == 0) throw DimensionError("resize_bilinear: target size must be positive");
  const std::size_t H = X.dim(0), W = X.dim(1), C = X.dim(2);
  if (out_h == H && out_w == W) return reshape(image, X.shape());

  const auto ty = bilinear_taps(H, out_h);
  const auto tx = bilinear_taps(W, out_w);
  Tensor out({out_h, out_w, C});
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap& a = ty[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& b = tx[x];
      for (std::size_t c = 0; c < C; ++c) {
        const double top = (1.0 - b.frac) * X.at(a.i0, b.i0, c) + b.frac * X.at(a.i0, b.i1, c);
        const double bot = (1.0 - b.frac) * X.at(a.i1, b.i0, c) + b.frac * X.at(a.i1, b.i1, c);
        out.at(y, x, c) = (1.0 - a.frac) * top + a.frac * bot;
      }
    }
  }
  return image.tape().record(std::move(out), {image}, [image, ty, tx, C](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad(image);
    const std::size_t out_w = tx.size();
    for (std::size_t y = 0; y < ty.size(); ++y) {
      const Tap& a = ty[y];
      for (std::size_t x = 0; x < out_w; ++x) {
        const Tap& b = tx[x];
        for (std::size_t c = 0; c < C; ++c) {
          const double gv = g[(y * out_w + x) * C + c];
          gx.at(a.i0, b.i0, c) += gv * (1.0 - a.frac) * (1.0 - b.frac);
          gx.at(a.i0, b.i1, c) += gv * (1.0 - a.frac) * b.frac;
          gx.at(a.i1, b.i0, c) += gv * a.frac * (1.0 - b.frac);
          gx.at(a.i1, b.i1, c) += gv * a.frac * b.frac;
        }
      }
    }
  });
}

Var pad_zero(const Var& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w) {
  const Tensor& X = image.value();
  require_image(X, "pad_zero");
  const std::size_t H = X.dim(0), W = X.dim(1), C = X.dim(2);
  if (top + H > out_h || left + W > out_w) {
    throw DimensionError("pad_zero: " + shape_string(X.shape()) + " at offset (" + std::to_string(top) + ", " +
                         std::to_string(left) + ") does not fit a " + std::to_string(out_h) + "x" +
                         std::to_string(out_w) + " canvas");
  }
  if (out_h == H && out_w == W) return reshape(image, X.shape());
  Tensor out({out_h, out_w, C});
  for (std::size_t y = 0; y < H; ++y) {
    const double* src = X.data().data() + y * W * C;
    std::copy(src, src + W * C, out.data().data() + ((y + top) * out_w + left) * C);
  }
  return image.tape().record(std::move(out), {image}, [image, top, left, H, W, C, out_w](BackwardContext& ctx) {
    const double* g = ctx.grad_output().data().data();
    double* gx = ctx.grad(image).data().data();
    for (std::size_t y = 0; y < H; ++y) {
      const double* src = g + ((y + top) * out_w + left) * C;
      double* dst = gx + y * W * C;
      for (std::size_t i = 0; i < W * C; ++i) dst[i] += src[i];
    }
  });
}

Var flip_horizontal(const Var& image) {
  const Tensor& X = image.value();
  require_image(X, "flip_horizontal");
  const std::size_t H = X.dim(0), W = X.dim(1), C = X.dim(2);
  Tensor out(X.shape());
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x)
      for (std::size_t c = 0; c < C; ++c) out.at(y, x, c) = X.at(y, W - 1 - x, c);
  return image.tape().record(std::move(out), {image}, [image, H, W, C](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad(image);
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t c = 0; c < C; ++c) gx.at(y, W - 1 - x, c) += g[(y * W + x) * C + c];
  });
}

Var adjust_brightness(const Var& image, double delta) {
  require_image(image.value(), "adjust_brightness");
  return clamp(add_scalar(image, delta), 0.0, 1.0);
}

Var adjust_contrast(const Var& image, double factor) {
  const Tensor& X = image.value();
  require_image(X, "adjust_contrast");
  const std::size_t n = X.dim(0) * X.dim(1), C = X.dim(2);
  std::vector<double> mean(C, 0.0);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < C; ++c) mean[c] += X[p * C + c];
  for (double& m : mean) m /= static_cast<double>(n);
  Tensor out(X.shape());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < C; ++c) out[p * C + c] = mean[c] + factor * (X[p * C + c] - mean[c]);
  Var raw = image.tape().record(std::move(out), {image}, [image, n, C, factor](BackwardContext& ctx) {
    const Tensor& g = ctx.grad_output();
    Tensor& gx = ctx.grad(image);
    std::vector<double> gsum(C, 0.0);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c = 0; c < C; ++c) gsum[c] += g[p * C + c];
    const double shared = (1.0 - factor) / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c = 0; c < C; ++c) gx[p * C + c] += factor * g[p * C + c] + shared * gsum[c];
  });
  return clamp(raw, 0.0, 1.0);
}

Var adjust_saturation(const Var& image, double factor) {
  return per_pixel_rgb(image, "adjust_saturation",
                       [factor](const auto& r, const auto& g, const auto& b) { return saturate_pixel(r, g, b, factor); });
}

Var adjust_hue(const Var& image, double shift) {
  return per_pixel_rgb(image, "adjust_hue",
                       [shift](const auto& r, const auto& g, const auto& b) { return hue_pixel(r, g, b, shift); });
}

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  return on_constant(image, [&](const Var& v) { return resize_bilinear(v, out_h, out_w); });
}
Tensor pad_zero(const Tensor& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w) {
  return on_constant(image, [&](const Var& v) { return pad_zero(v, top, left, out_h, out_w); });
}
Tensor flip_horizontal(const Tensor& image) {
  return on_constant(image, [](const Var& v) { return flip_horizontal(v); });
}
Tensor adjust_brightness(const Tensor& image, double delta) {
  return on_constant(image, [&](const Var& v) { return adjust_brightness(v, delta); });
}
Tensor adjust_contrast(const Tensor& image, double factor) {
  return on_constant(image, [&](const Var& v) { return adjust_contrast(v, factor); });
}
Tensor adjust_saturation(const Tensor& image, double factor) {
  return on_constant(image, [&](const Var& v) { return adjust_saturation(v, factor); });
}
Tensor adjust_hue(const Tensor& image, double shift) {
  return on_constant(image, [&](const Var& v) { return adjust_hue(v, shift); });
}

}  // namespace advrand

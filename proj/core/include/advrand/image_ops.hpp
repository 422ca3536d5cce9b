#pragma once

#include <cstddef>

#include "advrand/tape.hpp"
#include "advrand/tensor.hpp"

// Differentiable image transforms on H x W x C tensors.
namespace advrand {

/// Bilinear resize with half-pixel centres: the source coordinate of output
/// index d is (d + 0.5) * in / out - 0.5, clamped to [0, in - 1]. Resizing to
/// the input size is an exact copy. The backward pass is the transpose of the
/// interpolation matrix.
Var resize_bilinear(const Var& image, std::size_t out_h, std::size_t out_w);
Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w);

/// Places the image on an out_h x out_w zero canvas with its top-left corner
/// at (top, left). Backward is the matching crop.
Var pad_zero(const Var& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w);
Tensor pad_zero(const Tensor& image, std::size_t top, std::size_t left, std::size_t out_h, std::size_t out_w);

/// Left-right mirror.
Var flip_horizontal(const Var& image);
Tensor flip_horizontal(const Tensor& image);

// Colour adjustments. Each result is clipped to [0, 1].

/// x + delta.
Var adjust_brightness(const Var& image, double delta);
/// m + factor * (x - m), with m the per-channel mean over all pixels.
Var adjust_contrast(const Var& image, double factor);
/// Scales HSV saturation by `factor` (clipped to [0, 1]). Needs 3 channels.
Var adjust_saturation(const Var& image, double factor);
/// Rotates HSV hue by `shift` turns (modulo 1). Needs 3 channels.
Var adjust_hue(const Var& image, double shift);

Tensor adjust_brightness(const Tensor& image, double delta);
Tensor adjust_contrast(const Tensor& image, double factor);
Tensor adjust_saturation(const Tensor& image, double factor);
Tensor adjust_hue(const Tensor& image, double shift);

}  // namespace advrand

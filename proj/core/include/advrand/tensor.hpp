#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace advrand {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. A Tensor is a plain value: copying it
/// copies the data, and nothing about it is tied to a gradient tape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const;
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // Rank-3 (height x width x channels) accessors.
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * shape_[1] + x) * shape_[2] + c];
  }

  /// Value of a single-element tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;
  double min() const;
  double max() const;
  double sum() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Image tensors are height x width x channels with values in [0,1].
using Image = Tensor;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace advrand

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ricon {

using Real = double;
using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of reals. Rank 1 tensors are vectors, rank 2 are
// (rows x cols) matrices, rank 3 are used for bilinear weight tensors.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0.0);
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor scalar(Real value);
  static Tensor vector(std::initializer_list<Real> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<Real>> rows);
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // Matrix view: rank 1 tensors read as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  Real& operator[](std::size_t k) { return values_[k]; }
  Real operator[](std::size_t k) const { return values_[k]; }
  Real& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  Real at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  Real& at(std::size_t a, std::size_t b, std::size_t c) {
    return values_[(a * shape_[1] + b) * shape_[2] + c];
  }
  Real at(std::size_t a, std::size_t b, std::size_t c) const {
    return values_[(a * shape_[1] + b) * shape_[2] + c];
  }

  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }
  Real* data() { return values_.data(); }
  const Real* data() const { return values_.data(); }

  std::span<const Real> row(std::size_t r) const {
    return std::span<const Real>(values_).subspan(r * cols(), cols());
  }

  void fill(Real value);
  bool all_finite() const;
  Tensor reshaped(Shape shape) const;

  // Elementwise accumulate; shapes must hold the same number of entries.
  Tensor& operator+=(const Tensor& other);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<Real> values_;
};

}  // namespace ricon

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sessrec/common.hpp"
#include "sessrec/rng.hpp"

namespace sessrec {

// Dense row-major tensor of doubles, rank 1 or 2. Doubles throughout: the
// model is small and gradient checks need the headroom.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<size_t>(numel_of(shape_)), 0.0);
  }

  Tensor(std::vector<int64_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), v_(std::move(values)) {
    if (static_cast<int64_t>(v_.size()) != numel_of(shape_)) {
      throw ShapeError("tensor value count " + std::to_string(v_.size()) +
                       " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, double value) {
    Tensor t(std::move(shape));
    for (auto& x : t.v_) x = value;
    return t;
  }

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  static Tensor gaussian(std::vector<int64_t> shape, Rng& rng, double mean, double stddev) {
    Tensor t(std::move(shape));
    for (auto& x : t.v_) x = rng.gaussian(mean, stddev);
    return t;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(v_.size()); }
  int64_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  int64_t cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 0); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double& operator[](int64_t i) { return v_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return v_[static_cast<size_t>(i)]; }

  double& at(int64_t r, int64_t c) { return v_[static_cast<size_t>(r * shape_[1] + c)]; }
  double at(int64_t r, int64_t c) const { return v_[static_cast<size_t>(r * shape_[1] + c)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  void fill(double value) {
    for (auto& x : v_) x = value;
  }

  static int64_t numel_of(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_str(shape));
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<double> v_;
};

}  // namespace sessrec

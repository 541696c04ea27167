#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "camsel/error.hpp"

namespace camsel {

/// Dense row-major array of `Scalar` with a runtime shape.
template <typename Scalar>
class Tensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape, Scalar fill = Scalar(0))
      : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  Scalar& operator[](std::size_t i) { return data_[i]; }
  Scalar operator[](std::size_t i) const { return data_[i]; }

  Eigen::Map<Vector> flat() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<const Vector> flat() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

  /// Row-major matrix view over the leading dimension and the flattened rest.
  Eigen::Map<Matrix> matrix() { return {data_.data(), shape_.at(0), static_cast<Eigen::Index>(size() / shape_.at(0))}; }
  Eigen::Map<const Matrix> matrix() const {
    return {data_.data(), shape_.at(0), static_cast<Eigen::Index>(size() / shape_.at(0))};
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), Scalar(0)); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<Other>(data_[i]);
    return out;
  }

  bool operator==(const Tensor& other) const { return shape_ == other.shape_ && data_ == other.data_; }

  static std::size_t element_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeMismatch("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  // Aligned so that Eigen picks the same vectorised summation order on every run.
  std::vector<Scalar, Eigen::aligned_allocator<Scalar>> data_;
};

inline std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? ", " : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace camsel

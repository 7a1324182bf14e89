#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "deeppde/errors.hpp"

namespace deeppde {

/// Dense real tensor with row-major storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}
  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_))
      throw ConfigError("Tensor: data length does not match shape");
  }

  // Construction from external input: rejects NaN/Inf entries.
  static Tensor from_data(std::vector<int> shape, std::vector<double> data) {
    for (double v : data)
      if (!std::isfinite(v)) throw NumericalError("Tensor: non-finite entry");
    return Tensor(std::move(shape), std::move(data));
  }

  const std::vector<int>& shape() const { return shape_; }
  int dims() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::span<const int> idx) { return data_[flat_index(idx)]; }
  double at(std::span<const int> idx) const { return data_[flat_index(idx)]; }
  double& at(std::initializer_list<int> idx) {
    return data_[flat_index(std::span<const int>(idx.begin(), idx.size()))];
  }
  double at(std::initializer_list<int> idx) const {
    return data_[flat_index(std::span<const int>(idx.begin(), idx.size()))];
  }

  std::size_t flat_index(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < shape_.size(); ++k) f = f * shape_[k] + idx[k];
    return f;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static std::size_t checked_size(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int e : shape) {
      if (e <= 0) throw ConfigError("Tensor: extents must be positive");
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

/// Flat parameter store for network architectures.
using ParamVector = std::vector<double>;

}  // namespace deeppde

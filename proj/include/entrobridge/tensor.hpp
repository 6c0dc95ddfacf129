#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace entrobridge {

// Dense row-major N-dimensional array of doubles.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)) {
    std::size_t n = 1;
    strides_.assign(shape_.size(), 1);
    for (std::size_t k = shape_.size(); k-- > 0;) {
      strides_[k] = n;
      n *= shape_[k];
    }
    data_.assign(n, fill);
  }

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<std::size_t>& strides() const { return strides_; }

  double operator[](std::size_t flat) const { return data_[flat]; }
  double& operator[](std::size_t flat) { return data_[flat]; }

  std::size_t flatten(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) flat += idx[k] * strides_[k];
    return flat;
  }

  double at(std::span<const std::size_t> idx) const { return data_[flatten(idx)]; }
  double& at(std::span<const std::size_t> idx) { return data_[flatten(idx)]; }

  void unflatten(std::size_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(shape_.size());
    for (std::size_t k = 0; k < shape_.size(); ++k) {
      idx[k] = flat / strides_[k];
      flat %= strides_[k];
    }
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

// Advances a multi-index over `shape` in row-major order. Returns false on wrap.
inline bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& shape) {
  for (std::size_t k = shape.size(); k-- > 0;) {
    if (++idx[k] < shape[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace entrobridge

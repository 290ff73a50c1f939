#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tcof {

// Dense row-major float array. The last index varies fastest.
class Tensor {
 public:
  using Dims = std::vector<std::size_t>;

  Tensor() = default;
  explicit Tensor(Dims dims, float fill = 0.0f);
  Tensor(Dims dims, std::vector<float> data);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  float operator[](std::size_t i) const { return data_[i]; }
  float& operator[](std::size_t i) { return data_[i]; }

  // Rank-3 element access, (channel, row, column).
  float operator()(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * dims_[1] + y) * dims_[2] + x];
  }
  float& operator()(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * dims_[1] + y) * dims_[2] + x];
  }

  // Flat view as an Eigen column vector.
  Eigen::Map<const Eigen::VectorXf> vector() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }
  Eigen::Map<Eigen::VectorXf> vector() {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  Tensor reshaped(Dims dims) const;
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Dims dims_;
  std::vector<float> data_;
};

std::size_t element_count(const Tensor::Dims& dims);
std::string to_string(const Tensor::Dims& dims);

// Channel/height/width of an image-like tensor.
struct ImageShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  Tensor::Dims dims() const { return {channels, height, width}; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

Tensor from_vector(const Eigen::Ref<const Eigen::VectorXd>& v);
Tensor from_vector(const Eigen::Ref<const Eigen::VectorXf>& v);

Tensor subtract(const Tensor& a, const Tensor& b);

}  // namespace tcof

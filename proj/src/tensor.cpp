#include "tcof/tensor.hpp"

#include "tcof/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tcof {

std::size_t element_count(const Tensor::Dims& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string to_string(const Tensor::Dims& dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Dims dims, float fill) : dims_(std::move(dims)), data_(element_count(dims_), fill) {}

Tensor::Tensor(Dims dims, std::vector<float> data) : dims_(std::move(dims)), data_(std::move(data)) {
  if (data_.size() != element_count(dims_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match dims " +
                     to_string(dims_));
  }
}

Tensor Tensor::reshaped(Dims dims) const {
  if (element_count(dims) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(dims_) + " to " + to_string(dims));
  }
  return Tensor(std::move(dims), data_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

Tensor from_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<float> data(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor from_vector(const Eigen::Ref<const Eigen::VectorXf>& v) {
  return Tensor({static_cast<std::size_t>(v.size())}, std::vector<float>(v.data(), v.data() + v.size()));
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) {
    throw ShapeError("subtract: dims " + to_string(a.dims()) + " vs " + to_string(b.dims()));
  }
  Tensor out(a.dims());
  out.vector() = a.vector() - b.vector();
  return out;
}

}  // namespace tcof

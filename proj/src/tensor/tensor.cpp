#include "amt/tensor.hpp"

#include <cmath>
#include <cstring>

namespace amt {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + ", " + std::to_string(s.c) + ", " +
         std::to_string(s.h) + ", " + std::to_string(s.w) + ")";
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  require(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          ErrorCode::kInvalidArgument, "negative tensor dimension " + to_string(shape));
  data_.assign(shape.count(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(shape), data_(std::move(values)) {
  require(data_.size() == shape_.count(), ErrorCode::kShapeMismatch,
          "tensor payload of " + std::to_string(data_.size()) +
              " values does not match shape " + to_string(shape_));
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Tensor::identical(const Tensor& other) const {
  return shape_ == other.shape_ &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

}  // namespace amt

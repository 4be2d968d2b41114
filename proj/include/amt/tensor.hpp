#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "amt/error.hpp"

namespace amt {

struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  bool same_spatial(const Shape& o) const { return h == o.h && w == o.w; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Dense NCHW float tensor, row-major with w fastest-varying.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor constant(Shape shape, float value) { return Tensor(shape, value); }

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) *
               shape_.w + x;
  }
  float& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // One (h, w) plane for sample n, channel c.
  std::span<float> plane(int n, int c) {
    return std::span<float>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }
  std::span<const float> plane(int n, int c) const {
    return std::span<const float>(data_).subspan(index(n, c, 0, 0), shape_.plane());
  }

  bool all_finite() const;

  // Bitwise equality of shape and payload.
  bool identical(const Tensor& other) const;

 private:
  Shape shape_{};
  std::vector<float> data_;
};

}  // namespace amt

#include <algorithm>

#include "amt/io.hpp"

namespace amt {

Padded pad_to_multiple(const Tensor& img, int m) {
  require(m >= 1, ErrorCode::kInvalidArgument, "pad multiple must be >= 1");
  const Shape& s = img.shape();
  const int ph = (s.h + m - 1) / m * m;
  const int pw = (s.w + m - 1) / m * m;
  Padded out{Tensor(Shape{s.n, s.c, ph, pw}), CropBox{0, 0, s.w, s.h}};
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const auto src = img.plane(n, c);
      auto dst = out.image.plane(n, c);
      for (int y = 0; y < ph; ++y) {
        const int sy = std::min(y, s.h - 1);
        for (int x = 0; x < pw; ++x) {
          dst[static_cast<std::size_t>(y) * pw + x] =
              src[static_cast<std::size_t>(sy) * s.w + std::min(x, s.w - 1)];
        }
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& img, const CropBox& box) {
  const Shape& s = img.shape();
  require(box.x >= 0 && box.y >= 0 && box.width >= 0 && box.height >= 0 &&
              box.x + box.width <= s.w && box.y + box.height <= s.h,
          ErrorCode::kShapeMismatch, "crop box exceeds the image " + to_string(s));
  Tensor out(Shape{s.n, s.c, box.height, box.width});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const auto src = img.plane(n, c);
      auto dst = out.plane(n, c);
      for (int y = 0; y < box.height; ++y) {
        const auto row = src.subspan(static_cast<std::size_t>(box.y + y) * s.w + box.x, box.width);
        std::copy(row.begin(), row.end(), dst.begin() + static_cast<std::ptrdiff_t>(y) * box.width);
      }
    }
  }
  return out;
}

}  // namespace amt

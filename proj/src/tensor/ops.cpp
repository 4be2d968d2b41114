#include "amt/ops.hpp"

#include <algorithm>
#include <cmath>

#include "amt/parallel.hpp"

namespace amt {
namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return;
  const Shape& x = a.shape();
  const Shape& y = b.shape();
  const char* axis = x.n != y.n ? "batch" : x.c != y.c ? "channel" : x.h != y.h ? "height" : "width";
  fail(ErrorCode::kShapeMismatch, std::string(op) + ": " + axis + " mismatch between " +
                                      to_string(x) + " and " + to_string(y));
}

}  // namespace

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
  const Shape& s = input.shape();
  require(s.c == spec.in_channels, ErrorCode::kShapeMismatch,
          "conv2d: channel axis mismatch, input has " + std::to_string(s.c) +
              " channels but the layer expects " + std::to_string(spec.in_channels));
  require(spec.stride >= 1 && spec.padding >= 0 && spec.kernel_h >= 1 && spec.kernel_w >= 1,
          ErrorCode::kInvalidArgument, "conv2d: invalid stride, padding or kernel");
  const std::size_t kernel_volume =
      static_cast<std::size_t>(spec.in_channels) * spec.kernel_h * spec.kernel_w;
  require(spec.weight.size() == kernel_volume * spec.out_channels, ErrorCode::kShapeMismatch,
          "conv2d: weight size does not match (out, in, kh, kw)");
  require(spec.bias.size() == static_cast<std::size_t>(spec.out_channels),
          ErrorCode::kShapeMismatch, "conv2d: bias size does not match out channels");

  const int oh = spec.out_h(s.h);
  const int ow = spec.out_w(s.w);
  require(oh >= 1 && ow >= 1, ErrorCode::kShapeMismatch,
          "conv2d: height/width too small for the kernel");
  require(oh == (s.h + 2 * spec.padding - spec.kernel_h) / spec.stride + 1 &&
              ow == (s.w + 2 * spec.padding - spec.kernel_w) / spec.stride + 1,
          ErrorCode::kShapeMismatch, "conv2d: output size arithmetic");

  Tensor out(Shape{s.n, spec.out_channels, oh, ow});
  const int stride = spec.stride;
  const int pad = spec.padding;

  parallel_for(0, s.n * spec.out_channels, [&](int job) {
    const int n = job / spec.out_channels;
    const int co = job % spec.out_channels;
    const float* wco = spec.weight.data() + co * kernel_volume;
    std::vector<float> acc(ow);
    for (int oy = 0; oy < oh; ++oy) {
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (int ci = 0; ci < s.c; ++ci) {
        const float* src = input.plane(n, ci).data();
        for (int ky = 0; ky < spec.kernel_h; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= s.h) continue;
          const float* row = src + static_cast<std::size_t>(iy) * s.w;
          for (int kx = 0; kx < spec.kernel_w; ++kx) {
            const float wv = wco[(ci * spec.kernel_h + ky) * spec.kernel_w + kx];
            // Valid ox satisfy 0 <= ox*stride - pad + kx < w.
            const int lo_num = pad - kx;
            int ox_lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
            int ox_hi = (s.w - 1 + pad - kx);
            ox_hi = ox_hi < 0 ? -1 : std::min(ow - 1, ox_hi / stride);
            if (stride == 1) {
              const float* base = row - pad + kx;
              for (int ox = ox_lo; ox <= ox_hi; ++ox) acc[ox] += wv * base[ox];
            } else {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) acc[ox] += wv * row[ox * stride - pad + kx];
            }
          }
        }
      }
      float* dst = out.plane(n, co).data() + static_cast<std::size_t>(oy) * ow;
      const float b = spec.bias[co];
      for (int ox = 0; ox < ow; ++ox) dst[ox] = acc[ox] + b;
    }
  });
  return out;
}

Tensor prelu(const Tensor& input, std::span<const float> slopes) {
  require(slopes.size() == static_cast<std::size_t>(input.c()), ErrorCode::kShapeMismatch,
          "prelu: " + std::to_string(slopes.size()) + " slopes for " +
              std::to_string(input.c()) + " channels");
  Tensor out(input.shape());
  for (int n = 0; n < input.n(); ++n) {
    for (int c = 0; c < input.c(); ++c) {
      const float a = slopes[c];
      auto src = input.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= 0.0f ? src[i] : a * src[i];
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0f ? src[i] : 0.0f;
  return out;
}

Tensor sigmoid(const Tensor& input) {
  Tensor out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float x = src[i];
    if (x >= 0.0f) {
      dst[i] = 1.0f / (1.0f + std::exp(-x));
    } else {
      const float e = std::exp(x);
      dst[i] = e / (1.0f + e);
    }
  }
  return out;
}

Tensor instance_norm(const Tensor& input, float eps) {
  Tensor out(input.shape());
  for (int n = 0; n < input.n(); ++n) {
    for (int c = 0; c < input.c(); ++c) {
      auto src = input.plane(n, c);
      auto dst = out.plane(n, c);
      double sum = 0.0;
      for (float v : src) sum += v;
      const double mean = sum / static_cast<double>(src.size());
      double sq = 0.0;
      for (float v : src) sq += (v - mean) * (v - mean);
      const double inv = 1.0 / std::sqrt(sq / static_cast<double>(src.size()) + eps);
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>((src[i] - mean) * inv);
      }
    }
  }
  return out;
}

Tensor avg_pool2x2(const Tensor& input) {
  const Shape& s = input.shape();
  require(s.h % 2 == 0 && s.w % 2 == 0, ErrorCode::kShapeMismatch,
          "avg_pool2x2: odd spatial size " + to_string(s));
  const int oh = s.h / 2;
  const int ow = s.w / 2;
  Tensor out(Shape{s.n, s.c, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const float* src = input.plane(n, c).data();
      float* dst = out.plane(n, c).data();
      for (int y = 0; y < oh; ++y) {
        const float* r0 = src + static_cast<std::size_t>(2 * y) * s.w;
        const float* r1 = r0 + s.w;
        for (int x = 0; x < ow; ++x) {
          dst[y * ow + x] = (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]) * 0.25f;
        }
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  int i0;
  int i1;
  float frac;
};

std::vector<Tap> resize_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    double src = (d + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = std::min(i0 + 1, in - 1);
    taps[d] = Tap{i0, i1, static_cast<float>(src - i0)};
  }
  return taps;
}

}  // namespace

Tensor bilinear_resize(const Tensor& input, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, ErrorCode::kInvalidArgument,
          "bilinear_resize: output dims must be positive");
  const Shape& s = input.shape();
  require(s.h >= 1 && s.w >= 1, ErrorCode::kInvalidArgument, "bilinear_resize: empty input");
  if (s.h == out_h && s.w == out_w) return input;

  const auto ty = resize_taps(s.h, out_h);
  const auto tx = resize_taps(s.w, out_w);
  Tensor out(Shape{s.n, s.c, out_h, out_w});
  parallel_for(0, s.n * s.c, [&](int job) {
    const int n = job / s.c;
    const int c = job % s.c;
    const float* src = input.plane(n, c).data();
    float* dst = out.plane(n, c).data();
    for (int y = 0; y < out_h; ++y) {
      const float* r0 = src + static_cast<std::size_t>(ty[y].i0) * s.w;
      const float* r1 = src + static_cast<std::size_t>(ty[y].i1) * s.w;
      for (int x = 0; x < out_w; ++x) {
        const Tap& t = tx[x];
        // lerp form keeps constants exact.
        const float top = r0[t.i0] + t.frac * (r0[t.i1] - r0[t.i0]);
        const float bot = r1[t.i0] + t.frac * (r1[t.i1] - r1[t.i0]);
        dst[y * out_w + x] = top + ty[y].frac * (bot - top);
      }
    }
  });
  return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "concat_channels: no inputs");
  const Shape& first = parts.front().shape();
  int channels = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    require(s.n == first.n && s.h == first.h && s.w == first.w, ErrorCode::kShapeMismatch,
            "concat_channels: spatial mismatch between " + to_string(first) + " and " +
                to_string(s));
    channels += s.c;
  }
  Tensor out(Shape{first.n, channels, first.h, first.w});
  for (int n = 0; n < first.n; ++n) {
    int offset = 0;
    for (const Tensor& p : parts) {
      for (int c = 0; c < p.c(); ++c) {
        auto src = p.plane(n, c);
        std::copy(src.begin(), src.end(), out.plane(n, offset + c).begin());
      }
      offset += p.c();
    }
  }
  return out;
}

Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
  std::vector<Tensor> copies;
  copies.reserve(parts.size());
  for (const Tensor* p : parts) copies.push_back(*p);
  return concat_channels(std::span<const Tensor>(copies));
}

Tensor slice_channels(const Tensor& input, int begin, int count) {
  require(begin >= 0 && count >= 0 && begin + count <= input.c(), ErrorCode::kShapeMismatch,
          "slice_channels: range [" + std::to_string(begin) + ", " +
              std::to_string(begin + count) + ") exceeds " + std::to_string(input.c()) +
              " channels");
  Tensor out(Shape{input.n(), count, input.h(), input.w()});
  for (int n = 0; n < input.n(); ++n) {
    for (int c = 0; c < count; ++c) {
      auto src = input.plane(n, begin + c);
      std::copy(src.begin(), src.end(), out.plane(n, c).begin());
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "subtract");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor scale(const Tensor& a, float factor) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * factor;
  return out;
}

Tensor mean_of(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "mean_of: no inputs");
  Tensor out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    check_same_shape(out, parts[k], "mean_of");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += parts[k][i];
  }
  const float count = static_cast<float>(parts.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= count;
  return out;
}

Tensor constant_plane(int h, int w, float value) {
  return Tensor(Shape{1, 1, h, w}, value);
}

}  // namespace amt

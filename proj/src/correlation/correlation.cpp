#include "amt/correlation.hpp"

#include <cstring>
#include <span>

#include "amt/parallel.hpp"

namespace amt {

CorrelationVolume::CorrelationVolume(int rows, int cols, int target_h, int target_w)
    : rows_(rows), cols_(cols), target_h_(target_h), target_w_(target_w) {
  require(rows >= 0 && cols >= 0 && target_h >= 0 && target_w >= 0,
          ErrorCode::kInvalidArgument, "negative correlation volume dimension");
  values_.assign(static_cast<std::size_t>(rows) * cols * target_h * target_w, 0.0f);
}

bool CorrelationVolume::identical(const CorrelationVolume& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && target_h_ == other.target_h_ &&
         target_w_ == other.target_w_ &&
         (values_.empty() || std::memcmp(values_.data(), other.values_.data(),
                                         values_.size() * sizeof(float)) == 0);
}

CorrelationVolume build_all_pairs_volume(const Tensor& g0, const Tensor& g1) {
  require(g0.shape() == g1.shape(), ErrorCode::kShapeMismatch,
          "build_all_pairs_volume: feature shapes differ: " + to_string(g0.shape()) + " vs " +
              to_string(g1.shape()));
  require(g0.n() == 1, ErrorCode::kShapeMismatch, "build_all_pairs_volume: batch must be 1");
  const int depth = g0.c();
  const int h = g0.h();
  const int w = g0.w();
  const std::size_t hw = g0.shape().plane();
  CorrelationVolume volume(h, w, h, w);

  parallel_for(0, h, [&](int i) {
    for (int j = 0; j < w; ++j) {
      float* dst = volume.target_plane(i, j);
      const std::size_t q = static_cast<std::size_t>(i) * w + j;
      for (int d = 0; d < depth; ++d) {
        const float a = g0.plane(0, d)[q];
        const float* b = g1.plane(0, d).data();
        for (std::size_t kl = 0; kl < hw; ++kl) dst[kl] += a * b[kl];
      }
    }
  });
  return volume;
}

CorrelationVolume transpose_volume(const CorrelationVolume& c) {
  require(c.rows() == c.target_h() && c.cols() == c.target_w(), ErrorCode::kShapeMismatch,
          "transpose_volume: query and target grids differ");
  CorrelationVolume out(c.target_h(), c.target_w(), c.rows(), c.cols());
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < c.cols(); ++j) {
      for (int k = 0; k < c.target_h(); ++k) {
        for (int l = 0; l < c.target_w(); ++l) out.at(k, l, i, j) = c.at(i, j, k, l);
      }
    }
  }
  return out;
}

CorrelationVolume pool_target_axes(const CorrelationVolume& c) {
  require(c.target_h() % 2 == 0 && c.target_w() % 2 == 0, ErrorCode::kShapeMismatch,
          "pool_target_axes: target grid " + std::to_string(c.target_h()) + "x" +
              std::to_string(c.target_w()) + " is not divisible by 2");
  const int th = c.target_h() / 2;
  const int tw = c.target_w() / 2;
  CorrelationVolume out(c.rows(), c.cols(), th, tw);
  parallel_for(0, c.rows(), [&](int i) {
    for (int j = 0; j < c.cols(); ++j) {
      const float* src = c.target_plane(i, j);
      float* dst = out.target_plane(i, j);
      for (int y = 0; y < th; ++y) {
        const float* r0 = src + static_cast<std::size_t>(2 * y) * c.target_w();
        const float* r1 = r0 + c.target_w();
        for (int x = 0; x < tw; ++x) {
          dst[y * tw + x] = (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]) * 0.25f;
        }
      }
    }
  });
  return out;
}

CorrelationPyramid build_pyramid(const CorrelationVolume& volume, int levels) {
  require(levels >= 1, ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  const int div = 1 << (levels - 1);
  require(volume.target_h() % div == 0 && volume.target_w() % div == 0,
          ErrorCode::kShapeMismatch,
          "pyramid: target grid " + std::to_string(volume.target_h()) + "x" +
              std::to_string(volume.target_w()) + " not divisible by " + std::to_string(div));
  CorrelationPyramid pyr;
  pyr.forward.push_back(volume);
  pyr.backward.push_back(transpose_volume(volume));
  for (int k = 1; k < levels; ++k) {
    pyr.forward.push_back(pool_target_axes(pyr.forward.back()));
    pyr.backward.push_back(pool_target_axes(pyr.backward.back()));
  }
  return pyr;
}

CorrelationPyramid build_bidirectional_pyramid(const Tensor& g0, const Tensor& g1, int levels) {
  require(levels >= 1, ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  const int div = 1 << (levels - 1);
  require(g0.h() % div == 0 && g0.w() % div == 0, ErrorCode::kShapeMismatch,
          "pyramid: feature grid " + std::to_string(g0.h()) + "x" + std::to_string(g0.w()) +
              " not divisible by " + std::to_string(div));
  return build_pyramid(build_all_pairs_volume(g0, g1), levels);
}

std::pair<Tensor, Tensor> scale_bilateral_flows(const FlowPair& flows, float t) {
  require(t > 0.0f && t < 1.0f, ErrorCode::kInvalidArgument,
          "time step must lie strictly between 0 and 1, got " + std::to_string(t));
  validate(flows);
  const float forward_div = 1.0f - t;
  Tensor f01(flows.f_t1.shape());
  Tensor f10(flows.f_t0.shape());
  for (std::size_t i = 0; i < f01.size(); ++i) f01[i] = flows.f_t1[i] / forward_div;
  for (std::size_t i = 0; i < f10.size(); ++i) f10[i] = flows.f_t0[i] / t;
  return {std::move(f01), std::move(f10)};
}

namespace {

void gather_windows(std::span<const CorrelationVolume> stack, const Tensor& flow, int radius,
                    int channel_offset, Tensor& out) {
  const int rows = out.h();
  const int cols = out.w();
  const int win = 2 * radius + 1;
  const float* fx = flow.plane(0, 0).data();
  const float* fy = flow.plane(0, 1).data();
  parallel_for(0, rows, [&](int i) {
    for (int j = 0; j < cols; ++j) {
      const std::size_t q = static_cast<std::size_t>(i) * cols + j;
      const double cx = j + static_cast<double>(fx[q]);
      const double cy = i + static_cast<double>(fy[q]);
      for (std::size_t level = 0; level < stack.size(); ++level) {
        const CorrelationVolume& vol = stack[level];
        const double inv = 1.0 / static_cast<double>(1 << level);
        const double x = cx * inv;
        const double y = cy * inv;
        const float* plane = vol.target_plane(i, j);
        int ch = channel_offset + static_cast<int>(level) * win * win;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx, ++ch) {
            out.plane(0, ch)[q] =
                sample_zero_padded(plane, vol.target_h(), vol.target_w(), x + dx, y + dy);
          }
        }
      }
    }
  });
}

}  // namespace

Tensor lookup_correlation(const CorrelationPyramid& pyramid, const FlowPair& flows,
                          const LookupSpec& spec) {
  require(spec.radius >= 0, ErrorCode::kInvalidArgument, "lookup radius must be >= 0");
  require(spec.levels >= 1 && spec.levels <= pyramid.levels() &&
              pyramid.backward.size() == pyramid.forward.size(),
          ErrorCode::kInvalidArgument, "lookup requests more levels than the pyramid holds");
  validate(flows);
  const CorrelationVolume& base = pyramid.forward.front();
  require(flows.f_t0.n() == 1 && flows.f_t0.h() == base.rows() && flows.f_t0.w() == base.cols(),
          ErrorCode::kShapeMismatch,
          "lookup: flows " + to_string(flows.f_t0.shape()) + " do not match the " +
              std::to_string(base.rows()) + "x" + std::to_string(base.cols()) +
              " correlation grid");

  auto [f01, f10] = scale_bilateral_flows(flows, spec.t);
  Tensor out(Shape{1, spec.channels(), base.rows(), base.cols()});
  const auto levels = static_cast<std::size_t>(spec.levels);
  gather_windows(std::span(pyramid.forward).first(levels), f01, spec.radius, 0, out);
  gather_windows(std::span(pyramid.backward).first(levels), f10, spec.radius,
                 spec.channels() / 2, out);
  return out;
}

}  // namespace amt

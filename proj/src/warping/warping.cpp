#include "amt/warping.hpp"

#include "amt/ops.hpp"
#include "amt/parallel.hpp"

namespace amt {

void validate(const FlowPair& flows) {
  require(flows.f_t0.shape() == flows.f_t1.shape(), ErrorCode::kShapeMismatch,
          "flow pair shapes differ: " + to_string(flows.f_t0.shape()) + " vs " +
              to_string(flows.f_t1.shape()));
  require(flows.f_t0.c() == 2, ErrorCode::kShapeMismatch, "flow fields must have 2 channels");
  require(flows.f_t0.all_finite() && flows.f_t1.all_finite(), ErrorCode::kInvalidArgument,
          "flow fields contain non-finite values");
}

Tensor bilinear_sample(const Tensor& src, const Tensor& coords_x, const Tensor& coords_y) {
  require(coords_x.shape() == coords_y.shape(), ErrorCode::kShapeMismatch,
          "bilinear_sample: coordinate maps differ in shape");
  require(coords_x.c() == 1 && coords_x.n() == src.n(), ErrorCode::kShapeMismatch,
          "bilinear_sample: coordinate maps must be (n, 1, h, w)");
  const int oh = coords_x.h();
  const int ow = coords_x.w();
  Tensor out(Shape{src.n(), src.c(), oh, ow});
  parallel_for(0, src.n() * src.c(), [&](int job) {
    const int n = job / src.c();
    const int c = job % src.c();
    const float* plane = src.plane(n, c).data();
    const float* cx = coords_x.plane(n, 0).data();
    const float* cy = coords_y.plane(n, 0).data();
    float* dst = out.plane(n, c).data();
    for (std::size_t i = 0; i < out.shape().plane(); ++i) {
      dst[i] = sample_zero_padded(plane, src.h(), src.w(), cx[i], cy[i]);
    }
  });
  return out;
}

Tensor backward_warp(const Tensor& src, const Tensor& flow) {
  require(flow.c() == 2, ErrorCode::kShapeMismatch, "backward_warp: flow must have 2 channels");
  require(flow.n() == src.n() && flow.shape().same_spatial(src.shape()),
          ErrorCode::kShapeMismatch,
          "backward_warp: flow " + to_string(flow.shape()) + " does not match source " +
              to_string(src.shape()));
  const int h = src.h();
  const int w = src.w();
  Tensor out(src.shape());
  parallel_for(0, src.n() * src.c(), [&](int job) {
    const int n = job / src.c();
    const int c = job % src.c();
    const float* plane = src.plane(n, c).data();
    const float* fx = flow.plane(n, 0).data();
    const float* fy = flow.plane(n, 1).data();
    float* dst = out.plane(n, c).data();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int i = y * w + x;
        dst[i] = sample_zero_padded(plane, h, w, x + static_cast<double>(fx[i]),
                                    y + static_cast<double>(fy[i]));
      }
    }
  });
  return out;
}

Tensor resize_flow(const Tensor& flow, int h, int w, float value_scale) {
  return scale(bilinear_resize(flow, h, w), value_scale);
}

Tensor upsample_flow_2x(const Tensor& flow) {
  return resize_flow(flow, flow.h() * 2, flow.w() * 2, 2.0f);
}

}  // namespace amt

#pragma once

#include <cmath>

#include "amt/tensor.hpp"

namespace amt {

/// Bilateral flows from the intermediate frame to each input frame, in pixel
/// units of their own grid. Channel 0 is +x (right), channel 1 is +y (down).
struct FlowPair {
  Tensor f_t0;
  Tensor f_t1;
  int scale_level = 0;
};

void validate(const FlowPair& flows);

/// Samples one (h, w) plane at a real-valued position. Each of the four
/// neighbouring taps contributes only if it lies inside the plane, so
/// positions beyond [-1, dim] read as zero and partial overlaps blend
/// against zero. Coordinates and weights are carried in double.
inline float sample_zero_padded(const float* plane, int h, int w, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  if (!(fx > -2.0 && fx < static_cast<double>(w) && fy > -2.0 && fy < static_cast<double>(h))) {
    return 0.0f;
  }
  const double lx = x - fx;
  const double ly = y - fy;
  const double hx = 1.0 - lx;
  const double hy = 1.0 - ly;
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const bool in_x0 = x0 >= 0;
  const bool in_x1 = x0 + 1 < w;
  const bool in_y0 = y0 >= 0;
  const bool in_y1 = y0 + 1 < h;
  double v = 0.0;
  if (in_y0) {
    const float* row = plane + static_cast<std::size_t>(y0) * w;
    if (in_x0) v += hy * hx * row[x0];
    if (in_x1) v += hy * lx * row[x0 + 1];
  }
  if (in_y1) {
    const float* row = plane + static_cast<std::size_t>(y0 + 1) * w;
    if (in_x0) v += ly * hx * row[x0];
    if (in_x1) v += ly * lx * row[x0 + 1];
  }
  return static_cast<float>(v);
}

/// Samples every channel of src at per-pixel coordinates. coords_x and
/// coords_y are (n, 1, h, w) maps that define the output grid.
Tensor bilinear_sample(const Tensor& src, const Tensor& coords_x, const Tensor& coords_y);

/// out[y, x] = src sampled at (x + flow_x, y + flow_y).
Tensor backward_warp(const Tensor& src, const Tensor& flow);

/// Bilinear 2x upsampling with displacement values doubled.
Tensor upsample_flow_2x(const Tensor& flow);

/// Resamples a flow field to (h, w) and multiplies its values by value_scale.
Tensor resize_flow(const Tensor& flow, int h, int w, float value_scale);

}  // namespace amt

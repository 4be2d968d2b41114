#pragma once

#include <span>
#include <vector>

#include "amt/tensor.hpp"

namespace amt {

// Non-owning view of a convolution layer. The weight span is laid out as
// (out, in, kh, kw) and the bias span holds one value per output channel.
struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  std::span<const float> weight;
  std::span<const float> bias;

  int out_h(int h) const { return (h + 2 * padding - kernel_h) / stride + 1; }
  int out_w(int w) const { return (w + 2 * padding - kernel_w) / stride + 1; }
};

/// Zero-padded cross-correlation. Every output element accumulates in the
/// fixed order (in-channel, ky, kx) and the bias is added last, so results
/// are bit-identical regardless of thread count.
Tensor conv2d(const Tensor& input, const ConvSpec& spec);

Tensor prelu(const Tensor& input, std::span<const float> slopes);
Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);

// Per-(sample, channel) normalization over the spatial plane, no affine.
Tensor instance_norm(const Tensor& input, float eps = 1e-5f);

Tensor avg_pool2x2(const Tensor& input);

// Half-pixel-centre bilinear resampling with edge clamping.
Tensor bilinear_resize(const Tensor& input, int out_h, int out_w);

Tensor concat_channels(std::span<const Tensor> parts);
Tensor concat_channels(std::initializer_list<const Tensor*> parts);
Tensor slice_channels(const Tensor& input, int begin, int count);

Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);

// Elementwise mean of equally shaped tensors: (t0 + t1 + ...) / count,
// summed left to right.
Tensor mean_of(std::span<const Tensor> parts);

// Constant plane (1, 1, h, w) filled with value.
Tensor constant_plane(int h, int w, float value);

}  // namespace amt

#pragma once

#include <utility>
#include <vector>

#include "amt/tensor.hpp"
#include "amt/warping.hpp"

namespace amt {

/// 4-D correlation volume. The first two axes index the query grid
/// (rows x cols); the last two index the target grid, which shrinks as the
/// pyramid is pooled. Row-major, last axis fastest.
class CorrelationVolume {
 public:
  CorrelationVolume() = default;
  CorrelationVolume(int rows, int cols, int target_h, int target_w);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int target_h() const { return target_h_; }
  int target_w() const { return target_w_; }

  float& at(int i, int j, int k, int l) { return values_[offset(i, j) + k * target_w_ + l]; }
  float at(int i, int j, int k, int l) const { return values_[offset(i, j) + k * target_w_ + l]; }

  // Target-grid plane for query position (i, j).
  const float* target_plane(int i, int j) const { return values_.data() + offset(i, j); }
  float* target_plane(int i, int j) { return values_.data() + offset(i, j); }

  const std::vector<float>& values() const { return values_; }
  bool identical(const CorrelationVolume& other) const;

 private:
  std::size_t offset(int i, int j) const {
    return (static_cast<std::size_t>(i) * cols_ + j) * target_h_ * target_w_;
  }

  int rows_ = 0;
  int cols_ = 0;
  int target_h_ = 0;
  int target_w_ = 0;
  std::vector<float> values_;
};

/// Forward and backward stacks; level 0 is the full-resolution volume and
/// each further level average-pools the target axes by 2.
struct CorrelationPyramid {
  std::vector<CorrelationVolume> forward;
  std::vector<CorrelationVolume> backward;

  int levels() const { return static_cast<int>(forward.size()); }
};

struct LookupSpec {
  int radius = 3;
  int levels = 4;
  float t = 0.5f;

  int window() const { return 2 * radius + 1; }
  int channels() const { return 2 * levels * window() * window(); }
};

/// value[i,j,k,l] = sum over d of g0[d,i,j] * g1[d,k,l], summed in d order.
/// No normalisation is applied.
CorrelationVolume build_all_pairs_volume(const Tensor& g0, const Tensor& g1);

/// out[k,l,i,j] = in[i,j,k,l]. Only defined for volumes whose query and
/// target grids have equal size.
CorrelationVolume transpose_volume(const CorrelationVolume& c);

/// Pools the target axes of a volume with a 2x2 mean.
CorrelationVolume pool_target_axes(const CorrelationVolume& c);

CorrelationPyramid build_pyramid(const CorrelationVolume& volume, int levels);
CorrelationPyramid build_bidirectional_pyramid(const Tensor& g0, const Tensor& g1, int levels);

/// Converts bilateral flows to approximate bidirectional flows:
/// first = F_{0->1} = F_{t->1} / (1 - t), second = F_{1->0} = F_{t->0} / t.
std::pair<Tensor, Tensor> scale_bilateral_flows(const FlowPair& flows, float t);

/// Retrieves (2r+1)^2 windows from every forward level around F_{0->1}
/// targets and every backward level around F_{1->0} targets. Output is
/// (1, 2 L (2r+1)^2, rows, cols): forward levels first, then backward,
/// each window in row-major (dy, dx) order.
Tensor lookup_correlation(const CorrelationPyramid& pyramid, const FlowPair& flows,
                          const LookupSpec& spec);

}  // namespace amt

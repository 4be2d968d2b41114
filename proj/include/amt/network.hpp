#pragma once

#include <array>
#include <utility>
#include <vector>

#include "amt/correlation.hpp"
#include "amt/model.hpp"
#include "amt/warping.hpp"

namespace amt {

/// Flows and intermediate feature at one refinement level. Level l lives at
/// 1/2^(4-l) of the input resolution.
struct UpdateState {
  int level = 1;
  FlowPair flows;
  Tensor x_t;
};

struct UpdateResiduals {
  Tensor delta_flow;  // 4 channels: f_t0 then f_t1
  Tensor delta_feat;
};

struct FieldGroup {
  Tensor f_t0;
  Tensor f_t1;
  Tensor mask;  // (1, 1, H, W), sigmoid output
  Tensor residual;
};

struct ContextFeatures {
  std::array<Tensor, 3> x0;  // index l-1 holds level l
  std::array<Tensor, 3> x1;
  Tensor time_plane;         // constant plane fed to the initial decoder
  UpdateState init;
};

struct MultiFieldOutput {
  std::vector<FieldGroup> groups;
  std::vector<Tensor> candidates;
  Tensor frame;

  // Inspection trace of the refinement ladder.
  std::vector<UpdateState> before_update;
  std::vector<UpdateState> after_update;
  std::vector<Tensor> corr_features;
};

/// Shared-weight correlation encoder; returns (g0, g1) at 1/8 resolution.
std::pair<Tensor, Tensor> correlation_encoder_forward(const Tensor& i0, const Tensor& i1,
                                                      const ModelWeights& w);

ContextFeatures context_encoder_forward(const Tensor& i0, const Tensor& i1, float t,
                                        const ModelWeights& w);

/// Flows resampled to the 1/8 correlation grid, value-scaled to its pixels.
FlowPair flows_at_correlation_grid(const UpdateState& state);

UpdateResiduals update_block_residuals(const UpdateState& state, const Tensor& corr_feat,
                                       int level, const ModelWeights& w);
UpdateState update_block_forward(const UpdateState& state, const Tensor& corr_feat, int level,
                                 const ModelWeights& w);

/// Decoder for levels 1 and 2; returns the state at level + 1.
UpdateState decoder_forward(int level, const Tensor& warped0, const Tensor& warped1,
                            const UpdateState& state, const ModelWeights& w);

/// Raw N*8-channel output of the last decoder at half resolution.
Tensor multi_field_raw(const Tensor& warped0, const Tensor& warped1, const UpdateState& state,
                       const ModelWeights& w);
/// Splits and upsamples the last decoder's output into N full-res groups.
MultiFieldOutput multi_field_decode(const Tensor& warped0, const Tensor& warped1,
                                    const UpdateState& state, const ModelWeights& w, int n);

Tensor blend_candidate(const Tensor& i0, const Tensor& i1, const FieldGroup& group);
Tensor fuse_candidates(std::span<const Tensor> candidates, const ModelWeights& w);

/// Full forward pass. Frames are (1, 3, H, W) in [0, 1] with sides
/// divisible by ModelConfig::required_multiple().
MultiFieldOutput interpolate_forward(const Tensor& i0, const Tensor& i1, float t,
                                     const ModelWeights& w);

}  // namespace amt

#include "amt/network.hpp"

#include "amt/ops.hpp"

namespace amt {
namespace {

// Resolves layer names against the plan and applies conv + post-op.
class Layers {
 public:
  explicit Layers(const ModelWeights& w) : w_(w), plan_(layer_plan(w.config())) {}

  Tensor operator()(const std::string& name, const Tensor& x) const {
    const LayerDesc& layer = find_layer(plan_, name);
    Tensor y = conv2d(x, conv_spec(w_, layer));
    switch (layer.post) {
      case PostOp::kNone: return y;
      case PostOp::kPrelu: return prelu(y, w_.get(name + ".prelu").data());
      case PostOp::kNorm: return instance_norm(y);
      case PostOp::kNormRelu: return relu(instance_norm(y));
    }
    return y;
  }

  const ModelConfig& config() const { return w_.config(); }

 private:
  const ModelWeights& w_;
  std::vector<LayerDesc> plan_;
};

void check_frame_pair(const Tensor& i0, const Tensor& i1, const ModelConfig& cfg) {
  require(i0.shape() == i1.shape(), ErrorCode::kShapeMismatch,
          "frames differ in shape: " + to_string(i0.shape()) + " vs " + to_string(i1.shape()));
  require(i0.n() == 1 && i0.c() == 3, ErrorCode::kShapeMismatch,
          "frames must be (1, 3, H, W), got " + to_string(i0.shape()));
  const int m = cfg.required_multiple();
  require(i0.h() % m == 0 && i0.w() % m == 0, ErrorCode::kShapeMismatch,
          "frame size " + std::to_string(i0.w()) + "x" + std::to_string(i0.h()) +
              " is not a multiple of " + std::to_string(m));
}

void check_time(float t) {
  require(t > 0.0f && t < 1.0f, ErrorCode::kInvalidArgument,
          "time step must lie strictly between 0 and 1, got " + std::to_string(t));
}

Tensor encode_for_correlation(const Layers& net, const Tensor& img) {
  Tensor x = net("corr_enc.stem", img);
  for (const char* block : {"corr_enc.block0", "corr_enc.block1"}) {
    const std::string b(block);
    const Tensor y = net(b + ".conv2", net(b + ".conv1", x));
    x = relu(add(y, net(b + ".down", x)));
  }
  const Tensor y = net("corr_enc.block2.conv2", net("corr_enc.block2.conv1", x));
  x = relu(add(y, x));
  return net("corr_enc.head", x);
}

// Returns levels 1..3 (index l-1) and the 1/16 stage.
std::pair<std::array<Tensor, 3>, Tensor> encode_context(const Layers& net, const Tensor& img) {
  std::array<Tensor, 3> levels;
  Tensor x = img;
  for (int level = 3; level >= 1; --level) {
    const std::string base = "ctx_enc.level" + std::to_string(level);
    x = net(base + ".conv2", net(base + ".conv1", x));
    levels[level - 1] = x;
  }
  Tensor coarse = net("ctx_enc.coarse.conv2", net("ctx_enc.coarse.conv1", x));
  return {std::move(levels), std::move(coarse)};
}

FlowPair split_flows(const Tensor& four, int level) {
  return FlowPair{slice_channels(four, 0, 2), slice_channels(four, 2, 2), level};
}

Tensor join_flows(const FlowPair& f) { return concat_channels({&f.f_t0, &f.f_t1}); }

void check_state(const UpdateState& state, int level) {
  require(state.level == level, ErrorCode::kInvalidArgument,
          "state is at level " + std::to_string(state.level) + ", expected " +
              std::to_string(level));
  validate(state.flows);
  require(state.flows.f_t0.shape().same_spatial(state.x_t.shape()), ErrorCode::kShapeMismatch,
          "state flows and feature differ in spatial size");
}

}  // namespace

std::pair<Tensor, Tensor> correlation_encoder_forward(const Tensor& i0, const Tensor& i1,
                                                      const ModelWeights& w) {
  check_frame_pair(i0, i1, w.config());
  const Layers net(w);
  return {encode_for_correlation(net, i0), encode_for_correlation(net, i1)};
}

ContextFeatures context_encoder_forward(const Tensor& i0, const Tensor& i1, float t,
                                        const ModelWeights& w) {
  check_frame_pair(i0, i1, w.config());
  check_time(t);
  const Layers net(w);
  auto [x0, coarse0] = encode_context(net, i0);
  auto [x1, coarse1] = encode_context(net, i1);

  ContextFeatures out;
  out.x0 = std::move(x0);
  out.x1 = std::move(x1);
  out.time_plane = constant_plane(coarse0.h(), coarse0.w(), t);

  const Tensor hidden = net("init_dec.conv2",
                            net("init_dec.conv1",
                                concat_channels({&coarse0, &coarse1, &out.time_plane})));
  const Tensor flow = upsample_flow_2x(net("init_dec.flow_head", hidden));
  const Tensor feat = net("init_dec.feat_head", hidden);
  out.init.level = 1;
  out.init.flows = split_flows(flow, 1);
  out.init.x_t = bilinear_resize(feat, feat.h() * 2, feat.w() * 2);
  return out;
}

FlowPair flows_at_correlation_grid(const UpdateState& state) {
  if (state.level == 1) return state.flows;
  const int factor = 1 << (state.level - 1);
  const int h = state.flows.f_t0.h() / factor;
  const int w = state.flows.f_t0.w() / factor;
  const float s = 1.0f / static_cast<float>(factor);
  return FlowPair{resize_flow(state.flows.f_t0, h, w, s), resize_flow(state.flows.f_t1, h, w, s),
                  1};
}

UpdateResiduals update_block_residuals(const UpdateState& state, const Tensor& corr_feat,
                                       int level, const ModelWeights& w) {
  const ModelConfig& cfg = w.config();
  require(level >= 1 && level <= ModelConfig::kNumScales, ErrorCode::kInvalidArgument,
          "update level must lie in [1, 3]");
  check_state(state, level);
  require(corr_feat.c() == cfg.corr_channels(), ErrorCode::kShapeMismatch,
          "correlation feature has " + std::to_string(corr_feat.c()) + " channels, config expects " +
              std::to_string(cfg.corr_channels()));
  require(state.x_t.c() == cfg.context_width(level), ErrorCode::kShapeMismatch,
          "intermediate feature channel mismatch at level " + std::to_string(level));
  const int factor = 1 << (level - 1);
  const int h = state.x_t.h();
  const int wd = state.x_t.w();
  require(corr_feat.h() * factor == h && corr_feat.w() * factor == wd, ErrorCode::kShapeMismatch,
          "correlation feature is not at the 1/8 grid of this level");

  const bool rescale = level > 1 && !cfg.upsample_corr_feature;
  Tensor corr = corr_feat;
  Tensor flows;
  Tensor x;
  if (level == 1) {
    flows = join_flows(state.flows);
    x = state.x_t;
  } else if (cfg.upsample_corr_feature) {
    corr = bilinear_resize(corr_feat, h, wd);
    flows = join_flows(state.flows);
    x = state.x_t;
  } else {
    flows = join_flows(flows_at_correlation_grid(state));
    x = bilinear_resize(state.x_t, corr_feat.h(), corr_feat.w());
  }

  const Layers net(w);
  const std::string base = "update" + std::to_string(level);
  const Tensor c = net(base + ".corr2", net(base + ".corr1", corr));
  const Tensor f = net(base + ".flow2", net(base + ".flow1", flows));
  const Tensor joint = net(base + ".fuse2", net(base + ".fuse1", concat_channels({&c, &f, &x})));
  UpdateResiduals r;
  r.delta_flow = net(base + ".flow_head.conv2", net(base + ".flow_head.conv1", joint));
  r.delta_feat = net(base + ".feat_head.conv2", net(base + ".feat_head.conv1", joint));
  if (rescale) {
    r.delta_flow = resize_flow(r.delta_flow, h, wd, static_cast<float>(factor));
    r.delta_feat = bilinear_resize(r.delta_feat, h, wd);
  }
  return r;
}

UpdateState update_block_forward(const UpdateState& state, const Tensor& corr_feat, int level,
                                 const ModelWeights& w) {
  const UpdateResiduals r = update_block_residuals(state, corr_feat, level, w);
  UpdateState out;
  out.level = level;
  out.flows.scale_level = level;
  out.flows.f_t0 = add(state.flows.f_t0, slice_channels(r.delta_flow, 0, 2));
  out.flows.f_t1 = add(state.flows.f_t1, slice_channels(r.delta_flow, 2, 2));
  out.x_t = add(state.x_t, r.delta_feat);
  return out;
}

namespace {

Tensor decoder_input(const Tensor& warped0, const Tensor& warped1, const UpdateState& state,
                     int width) {
  require(warped0.c() == width && warped1.c() == width, ErrorCode::kShapeMismatch,
          "warped features must have " + std::to_string(width) + " channels");
  require(warped0.shape() == warped1.shape() &&
              warped0.shape().same_spatial(state.x_t.shape()),
          ErrorCode::kShapeMismatch, "warped features do not match the state resolution");
  return concat_channels(
      {&warped0, &warped1, &state.flows.f_t0, &state.flows.f_t1, &state.x_t});
}

}  // namespace

UpdateState decoder_forward(int level, const Tensor& warped0, const Tensor& warped1,
                            const UpdateState& state, const ModelWeights& w) {
  const ModelConfig& cfg = w.config();
  require(level == 1 || level == 2, ErrorCode::kInvalidArgument,
          "decoder_forward handles levels 1 and 2");
  check_state(state, level);
  const Layers net(w);
  const std::string base = "decoder" + std::to_string(level);
  const Tensor out = net(base + ".conv3",
                         net(base + ".conv2",
                             net(base + ".conv1",
                                 decoder_input(warped0, warped1, state, cfg.context_width(level)))));
  const int next_width = cfg.context_width(level + 1);
  UpdateState next;
  next.level = level + 1;
  next.flows = split_flows(upsample_flow_2x(slice_channels(out, 0, 4)), level + 1);
  next.x_t = bilinear_resize(slice_channels(out, 4, next_width), out.h() * 2, out.w() * 2);
  return next;
}

Tensor multi_field_raw(const Tensor& warped0, const Tensor& warped1, const UpdateState& state,
                       const ModelWeights& w) {
  check_state(state, 3);
  const Layers net(w);
  return net("decoder3.conv3",
             net("decoder3.conv2",
                 net("decoder3.conv1",
                     decoder_input(warped0, warped1, state, w.config().context_width(3)))));
}

MultiFieldOutput multi_field_decode(const Tensor& warped0, const Tensor& warped1,
                                    const UpdateState& state, const ModelWeights& w, int n) {
  require(n == w.config().num_fields, ErrorCode::kShapeMismatch,
          "requested " + std::to_string(n) + " fields, config has " +
              std::to_string(w.config().num_fields));
  const Tensor raw = multi_field_raw(warped0, warped1, state, w);
  require(raw.c() == 8 * n, ErrorCode::kShapeMismatch, "last decoder channel count mismatch");
  const Tensor up = bilinear_resize(raw, raw.h() * 2, raw.w() * 2);

  MultiFieldOutput out;
  out.groups.reserve(n);
  for (int g = 0; g < n; ++g) {
    const int base = 8 * g;
    FieldGroup group;
    group.f_t0 = scale(slice_channels(up, base, 2), 2.0f);
    group.f_t1 = scale(slice_channels(up, base + 2, 2), 2.0f);
    group.mask = sigmoid(slice_channels(up, base + 4, 1));
    group.residual = slice_channels(up, base + 5, 3);
    out.groups.push_back(std::move(group));
  }
  return out;
}

Tensor blend_candidate(const Tensor& i0, const Tensor& i1, const FieldGroup& group) {
  require(i0.shape() == i1.shape(), ErrorCode::kShapeMismatch, "blend: frames differ in shape");
  require(group.mask.c() == 1 && group.mask.n() == i0.n() &&
              group.mask.shape().same_spatial(i0.shape()),
          ErrorCode::kShapeMismatch, "blend: mask does not match the frames");
  require(group.residual.shape() == i0.shape(), ErrorCode::kShapeMismatch,
          "blend: residual does not match the frames");
  const Tensor w0 = backward_warp(i0, group.f_t0);
  const Tensor w1 = backward_warp(i1, group.f_t1);
  Tensor out(i0.shape());
  for (int n = 0; n < i0.n(); ++n) {
    const auto m = group.mask.plane(n, 0);
    for (int c = 0; c < i0.c(); ++c) {
      const auto a = w0.plane(n, c);
      const auto b = w1.plane(n, c);
      const auto r = group.residual.plane(n, c);
      auto dst = out.plane(n, c);
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const double mi = m[i];
        dst[i] = static_cast<float>(mi * a[i] + (1.0 - mi) * b[i] + r[i]);
      }
    }
  }
  return out;
}

Tensor fuse_candidates(std::span<const Tensor> candidates, const ModelWeights& w) {
  const int n = w.config().num_fields;
  require(static_cast<int>(candidates.size()) == n, ErrorCode::kShapeMismatch,
          "fusion expects " + std::to_string(n) + " candidates, got " +
              std::to_string(candidates.size()));
  const Tensor mean = mean_of(candidates);
  const Layers net(w);
  const Tensor refine = net("fusion.conv2", net("fusion.conv1", concat_channels(candidates)));
  return add(mean, refine);
}

MultiFieldOutput interpolate_forward(const Tensor& i0, const Tensor& i1, float t,
                                     const ModelWeights& w) {
  const ModelConfig& cfg = w.config();
  check_frame_pair(i0, i1, cfg);
  check_time(t);

  const auto [g0, g1] = correlation_encoder_forward(i0, i1, w);
  const CorrelationPyramid pyramid = build_bidirectional_pyramid(g0, g1, cfg.pyramid_levels);
  ContextFeatures ctx = context_encoder_forward(i0, i1, t, w);
  const LookupSpec lookup{cfg.radius, cfg.pyramid_levels, t};

  MultiFieldOutput out;
  UpdateState state = ctx.init;
  for (int level = 1; level <= ModelConfig::kNumScales; ++level) {
    out.before_update.push_back(state);
    Tensor corr = lookup_correlation(pyramid, flows_at_correlation_grid(state), lookup);
    state = update_block_forward(state, corr, level, w);
    out.corr_features.push_back(std::move(corr));
    out.after_update.push_back(state);

    const Tensor warped0 = backward_warp(ctx.x0[level - 1], state.flows.f_t0);
    const Tensor warped1 = backward_warp(ctx.x1[level - 1], state.flows.f_t1);
    if (level < ModelConfig::kNumScales) {
      state = decoder_forward(level, warped0, warped1, state, w);
    } else {
      MultiFieldOutput fields = multi_field_decode(warped0, warped1, state, w, cfg.num_fields);
      out.groups = std::move(fields.groups);
    }
  }

  out.candidates.reserve(out.groups.size());
  for (const FieldGroup& g : out.groups) out.candidates.push_back(blend_candidate(i0, i1, g));
  out.frame = fuse_candidates(out.candidates, w);
  return out;
}

}  // namespace amt

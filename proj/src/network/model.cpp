#include "amt/model.hpp"

#include <cmath>
#include <random>

#include "amt/error.hpp"

namespace amt {
namespace {

int level_div(int level) { return 1 << (4 - level); }

std::string level_name(const char* prefix, int level) {
  return std::string(prefix) + std::to_string(level);
}

}  // namespace

std::vector<LayerDesc> layer_plan(const ModelConfig& cfg) {
  cfg.validate();
  const InternalWidths iw = cfg.internal();
  const auto& e = iw.corr_encoder;
  std::vector<LayerDesc> plan;
  auto conv = [&plan](std::string name, int in, int out, int k, int stride, int div, PostOp post,
                      InitKind init = InitKind::kFanInUniform) {
    plan.push_back(LayerDesc{std::move(name), in, out, k, stride, div, post, init});
  };

  // Correlation encoder: residual blocks with instance normalisation.
  conv("corr_enc.stem", 3, e[0], 7, 2, 2, PostOp::kNormRelu);
  conv("corr_enc.block0.conv1", e[0], e[1], 3, 2, 4, PostOp::kNormRelu);
  conv("corr_enc.block0.conv2", e[1], e[1], 3, 1, 4, PostOp::kNorm);
  conv("corr_enc.block0.down", e[0], e[1], 1, 2, 4, PostOp::kNorm);
  conv("corr_enc.block1.conv1", e[1], e[2], 3, 2, 8, PostOp::kNormRelu);
  conv("corr_enc.block1.conv2", e[2], e[2], 3, 1, 8, PostOp::kNorm);
  conv("corr_enc.block1.down", e[1], e[2], 1, 2, 8, PostOp::kNorm);
  conv("corr_enc.block2.conv1", e[2], e[2], 3, 1, 8, PostOp::kNormRelu);
  conv("corr_enc.block2.conv2", e[2], e[2], 3, 1, 8, PostOp::kNorm);
  conv("corr_enc.head", e[2], cfg.corr_dim, 1, 1, 8, PostOp::kNone);

  // Context encoder, fine to coarse: levels 3, 2, 1 and the 1/16 stage.
  int in = 3;
  for (int level = 3; level >= 1; --level) {
    const int c = cfg.context_width(level);
    const std::string base = level_name("ctx_enc.level", level);
    conv(base + ".conv1", in, c, 3, 2, level_div(level), PostOp::kPrelu);
    conv(base + ".conv2", c, c, 3, 1, level_div(level), PostOp::kPrelu);
    in = c;
  }
  conv("ctx_enc.coarse.conv1", in, iw.coarse_context, 3, 2, 16, PostOp::kPrelu);
  conv("ctx_enc.coarse.conv2", iw.coarse_context, iw.coarse_context, 3, 1, 16, PostOp::kPrelu);

  // Initial flows and intermediate feature from both frames plus the time plane.
  conv("init_dec.conv1", 2 * iw.coarse_context + 1, iw.init_hidden, 3, 1, 16, PostOp::kPrelu);
  conv("init_dec.conv2", iw.init_hidden, iw.init_hidden, 3, 1, 16, PostOp::kPrelu);
  conv("init_dec.flow_head", iw.init_hidden, 4, 3, 1, 16, PostOp::kNone, InitKind::kZero);
  conv("init_dec.feat_head", iw.init_hidden, cfg.context_width(1), 3, 1, 16, PostOp::kNone);

  // Untied update blocks.
  for (int level = 1; level <= ModelConfig::kNumScales; ++level) {
    const int c = cfg.context_width(level);
    const int div = (cfg.upsample_corr_feature && level > 1) ? level_div(level) : 8;
    const std::string base = level_name("update", level);
    conv(base + ".corr1", cfg.corr_channels(), iw.update_corr, 1, 1, div, PostOp::kPrelu);
    conv(base + ".corr2", iw.update_corr, iw.update_corr, 3, 1, div, PostOp::kPrelu);
    conv(base + ".flow1", 4, 2 * iw.update_flow, 7, 1, div, PostOp::kPrelu);
    conv(base + ".flow2", 2 * iw.update_flow, iw.update_flow, 3, 1, div, PostOp::kPrelu);
    conv(base + ".fuse1", iw.update_corr + iw.update_flow + c, iw.update_hidden, 3, 1, div,
         PostOp::kPrelu);
    conv(base + ".fuse2", iw.update_hidden, iw.update_hidden, 3, 1, div, PostOp::kPrelu);
    conv(base + ".flow_head.conv1", iw.update_hidden, iw.update_head, 3, 1, div, PostOp::kPrelu);
    conv(base + ".flow_head.conv2", iw.update_head, 4, 3, 1, div, PostOp::kNone);
    conv(base + ".feat_head.conv1", iw.update_hidden, iw.update_head, 3, 1, div, PostOp::kPrelu);
    conv(base + ".feat_head.conv2", iw.update_head, c, 3, 1, div, PostOp::kNone);
  }

  // Decoders; the last one emits the multi-field groups.
  for (int level = 1; level <= ModelConfig::kNumScales; ++level) {
    const int c = cfg.context_width(level);
    const int hidden = iw.decoder_hidden[level - 1];
    const int out = level < ModelConfig::kNumScales ? 4 + cfg.context_width(level + 1)
                                                    : 8 * cfg.num_fields;
    const std::string base = level_name("decoder", level);
    conv(base + ".conv1", 3 * c + 4, hidden, 3, 1, level_div(level), PostOp::kPrelu);
    conv(base + ".conv2", hidden, hidden, 3, 1, level_div(level), PostOp::kPrelu);
    conv(base + ".conv3", hidden, out, 3, 1, level_div(level), PostOp::kNone);
  }

  const int n = cfg.num_fields;
  conv("fusion.conv1", 3 * n, 6 * n, 3, 1, 1, PostOp::kPrelu);
  conv("fusion.conv2", 6 * n, 3, 3, 1, 1, PostOp::kNone, InitKind::kZero);
  return plan;
}

const LayerDesc& find_layer(const std::vector<LayerDesc>& plan, const std::string& name) {
  for (const auto& l : plan) {
    if (l.name == name) return l;
  }
  fail(ErrorCode::kMissingParameter, "no layer named " + name);
}

std::vector<ParamSpec> parameter_manifest(const ModelConfig& cfg) {
  std::vector<ParamSpec> out;
  for (const LayerDesc& l : layer_plan(cfg)) {
    const auto fan_in = static_cast<std::uint32_t>(l.in * l.kernel * l.kernel);
    const auto o = static_cast<std::uint32_t>(l.out);
    const auto i = static_cast<std::uint32_t>(l.in);
    const auto k = static_cast<std::uint32_t>(l.kernel);
    out.push_back(ParamSpec{l.name + ".weight", {o, i, k, k}, l.init, 0.0f, fan_in});
    out.push_back(ParamSpec{l.name + ".bias", {o}, l.init, 0.0f, fan_in});
    if (l.post == PostOp::kPrelu) {
      out.push_back(ParamSpec{l.name + ".prelu", {o}, InitKind::kZero, 0.25f, 0});
    }
  }
  return out;
}

Shape shape_for_dims(const std::vector<std::uint32_t>& dims) {
  require(!dims.empty() && dims.size() <= 4, ErrorCode::kParameterShape,
          "parameter rank must lie in [1, 4]");
  int d[4] = {1, 1, 1, 1};
  for (std::size_t i = 0; i < dims.size(); ++i) d[i] = static_cast<int>(dims[i]);
  return Shape{d[0], d[1], d[2], d[3]};
}

const Tensor& ModelWeights::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorCode::kMissingParameter, "missing parameter " + name);
  return it->second;
}

Tensor& ModelWeights::mutable_get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorCode::kMissingParameter, "missing parameter " + name);
  return it->second;
}

void ModelWeights::zero_layer(const std::string& layer) {
  for (const char* suffix : {".weight", ".bias"}) {
    Tensor& t = mutable_get(layer + suffix);
    t = Tensor(t.shape(), 0.0f);
  }
}

void ModelWeights::validate() const {
  config_.validate();
  const auto manifest = parameter_manifest(config_);
  for (const ParamSpec& p : manifest) {
    auto it = params_.find(p.name);
    require(it != params_.end(), ErrorCode::kMissingParameter,
            "missing parameter " + p.name);
    require(it->second.shape() == shape_for_dims(p.dims), ErrorCode::kParameterShape,
            "parameter " + p.name + " has shape " + to_string(it->second.shape()) +
                ", expected " + to_string(shape_for_dims(p.dims)));
  }
  if (params_.size() != manifest.size()) {
    for (const auto& [name, _] : params_) {
      bool known = false;
      for (const ParamSpec& p : manifest) known = known || p.name == name;
      require(known, ErrorCode::kUnexpectedParameter, "unexpected parameter " + name);
    }
  }
}

ConvSpec conv_spec(const ModelWeights& w, const LayerDesc& layer) {
  ConvSpec spec;
  spec.in_channels = layer.in;
  spec.out_channels = layer.out;
  spec.kernel_h = layer.kernel;
  spec.kernel_w = layer.kernel;
  spec.stride = layer.stride;
  spec.padding = layer.padding();
  spec.weight = w.get(layer.name + ".weight").data();
  spec.bias = w.get(layer.name + ".bias").data();
  return spec;
}

std::int64_t count_parameters(const ModelWeights& w) {
  std::int64_t total = 0;
  for (const auto& [_, t] : w.params()) total += static_cast<std::int64_t>(t.size());
  return total;
}

std::int64_t count_parameters(const ModelConfig& cfg) {
  std::int64_t total = 0;
  for (const ParamSpec& p : parameter_manifest(cfg)) {
    std::int64_t n = 1;
    for (auto d : p.dims) n *= d;
    total += n;
  }
  return total;
}

std::int64_t estimate_flops(const ModelConfig& cfg, int h, int w) {
  require(h >= 1 && w >= 1, ErrorCode::kInvalidArgument, "resolution must be positive");
  const std::int64_t m = cfg.required_multiple();
  const std::int64_t ph = (h + m - 1) / m * m;
  const std::int64_t pw = (w + m - 1) / m * m;
  std::int64_t flops = 0;

  // Encoders run once per frame; everything after the encoders runs once.
  for (const LayerDesc& l : layer_plan(cfg)) {
    const std::int64_t pixels = (ph / l.resolution_div) * (pw / l.resolution_div);
    const bool per_frame = l.name.rfind("corr_enc.", 0) == 0 || l.name.rfind("ctx_enc.", 0) == 0;
    flops += (per_frame ? 2 : 1) * 2 * std::int64_t{l.in} * l.out * l.kernel * l.kernel * pixels;
  }

  const std::int64_t grid = (ph / 8) * (pw / 8);
  flops += 2 * std::int64_t{cfg.corr_dim} * grid * grid;
  // Pyramid pooling: one flop per pooled input element, both stacks.
  std::int64_t target = grid;
  for (int k = 1; k < cfg.pyramid_levels; ++k) {
    flops += 2 * grid * target;
    target /= 4;
  }
  // Lookups: four multiply-adds per retrieved sample, one lookup per level.
  flops += ModelConfig::kNumScales * std::int64_t{cfg.corr_channels()} * grid * 8;
  // Feature warps at levels 1..3 and image warps plus blend per field.
  for (int level = 1; level <= ModelConfig::kNumScales; ++level) {
    const std::int64_t px = (ph / level_div(level)) * (pw / level_div(level));
    flops += 2 * std::int64_t{cfg.context_width(level)} * px * 8;
  }
  flops += std::int64_t{cfg.num_fields} * 3 * ph * pw * (2 * 8 + 5);
  return flops;
}

ModelWeights random_init_weights(const ModelConfig& cfg, std::uint64_t seed) {
  ModelWeights weights(cfg);
  std::mt19937_64 rng(seed);
  // 24 high bits -> float in [0, 1), independent of the standard library's
  // distribution implementations.
  auto unit = [&rng] { return static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f); };
  for (const ParamSpec& p : parameter_manifest(cfg)) {
    Tensor t(shape_for_dims(p.dims), p.constant);
    if (p.init == InitKind::kFanInUniform) {
      const float bound = 1.0f / std::sqrt(static_cast<float>(p.fan_in));
      for (float& v : t.data()) v = (2.0f * unit() - 1.0f) * bound;
    }
    weights.set(p.name, std::move(t));
  }
  return weights;
}

}  // namespace amt

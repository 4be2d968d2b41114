#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amt/config.hpp"
#include "amt/ops.hpp"
#include "amt/tensor.hpp"

namespace amt {

enum class PostOp { kNone, kPrelu, kNorm, kNormRelu };
enum class InitKind { kFanInUniform, kZero };

/// One convolution of the architecture. The output grid is the input frame
/// divided by resolution_div.
struct LayerDesc {
  std::string name;
  int in = 0;
  int out = 0;
  int kernel = 3;
  int stride = 1;
  int resolution_div = 1;
  PostOp post = PostOp::kPrelu;
  InitKind init = InitKind::kFanInUniform;

  int padding() const { return kernel / 2; }
};

struct ParamSpec {
  std::string name;
  std::vector<std::uint32_t> dims;
  InitKind init = InitKind::kFanInUniform;
  float constant = 0.0f;  // used by PReLU slopes
  std::uint32_t fan_in = 0;
};

/// Every convolution of the model, in canonical order.
std::vector<LayerDesc> layer_plan(const ModelConfig& cfg);
const LayerDesc& find_layer(const std::vector<LayerDesc>& plan, const std::string& name);

/// Every parameter demanded by the config, in canonical (file) order.
std::vector<ParamSpec> parameter_manifest(const ModelConfig& cfg);

Shape shape_for_dims(const std::vector<std::uint32_t>& dims);

/// Named parameter store. Entries are kept sorted by name; the canonical
/// order lives in the manifest.
class ModelWeights {
 public:
  ModelWeights() = default;
  explicit ModelWeights(ModelConfig config) : config_(config) {}

  const ModelConfig& config() const { return config_; }

  const Tensor& get(const std::string& name) const;
  Tensor& mutable_get(const std::string& name);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  void set(const std::string& name, Tensor value) { params_[name] = std::move(value); }
  void erase(const std::string& name) { params_.erase(name); }
  std::size_t size() const { return params_.size(); }

  const std::map<std::string, Tensor>& params() const { return params_; }

  /// Zeroes a layer's weight and bias.
  void zero_layer(const std::string& layer);

  /// Throws if any manifest entry is missing, misshapen, or if extra
  /// entries are present.
  void validate() const;

 private:
  ModelConfig config_;
  std::map<std::string, Tensor> params_;
};

ConvSpec conv_spec(const ModelWeights& w, const LayerDesc& layer);

std::int64_t count_parameters(const ModelWeights& w);
std::int64_t count_parameters(const ModelConfig& cfg);

/// Analytic FLOPs (2 x multiply-adds) of one forward pass at the padded
/// resolution the engine would run for an h x w input.
std::int64_t estimate_flops(const ModelConfig& cfg, int h, int w);

/// Deterministic seeded initialisation: fan-in scaled uniform for
/// convolutions, 0.25 for PReLU slopes, zeros for the initial flow head
/// and the final fusion layer.
ModelWeights random_init_weights(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace amt

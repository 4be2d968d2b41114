#include "amt/config.hpp"

#include <algorithm>
#include <cctype>

#include "amt/error.hpp"

namespace amt {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kSmall: return "AMT-S";
    case Variant::kLarge: return "AMT-L";
    case Variant::kGlobal: return "AMT-G";
  }
  return "unknown";
}

bool parse_variant(const std::string& text, Variant& out) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t.rfind("AMT-", 0) == 0) t = t.substr(4);
  if (t == "S") out = Variant::kSmall;
  else if (t == "L") out = Variant::kLarge;
  else if (t == "G") out = Variant::kGlobal;
  else return false;
  return true;
}

ModelConfig ModelConfig::small() {
  ModelConfig c;
  c.variant = Variant::kSmall;
  c.corr_dim = 84;
  c.context = {48, 32, 20};
  c.num_fields = 3;
  return c;
}

ModelConfig ModelConfig::large() {
  ModelConfig c;
  c.variant = Variant::kLarge;
  c.corr_dim = 128;
  c.context = {64, 48, 32};
  c.num_fields = 5;
  return c;
}

ModelConfig ModelConfig::global() {
  ModelConfig c;
  c.variant = Variant::kGlobal;
  c.corr_dim = 128;
  c.context = {96, 64, 48};
  c.num_fields = 5;
  c.upsample_corr_feature = true;
  return c;
}

ModelConfig ModelConfig::preset(Variant v) {
  switch (v) {
    case Variant::kSmall: return small();
    case Variant::kLarge: return large();
    case Variant::kGlobal: return global();
  }
  fail(ErrorCode::kInvalidConfig, "unknown variant");
}

void ModelConfig::validate() const {
  const auto v = static_cast<unsigned>(variant);
  require(v <= 2, ErrorCode::kInvalidConfig, "unknown variant id " + std::to_string(v));
  require(corr_dim >= 1, ErrorCode::kInvalidConfig, "corr_dim must be >= 1");
  for (int c : context) require(c >= 1, ErrorCode::kInvalidConfig, "context widths must be >= 1");
  require(pyramid_levels >= 1 && pyramid_levels <= 8, ErrorCode::kInvalidConfig,
          "pyramid levels must lie in [1, 8]");
  require(radius >= 0 && radius <= 16, ErrorCode::kInvalidConfig, "radius must lie in [0, 16]");
  require(num_fields >= 1 && num_fields <= 64, ErrorCode::kInvalidConfig,
          "num_fields must lie in [1, 64]");
}

int ModelConfig::required_multiple() const {
  // 1/8 correlation grid pooled L-1 times, and the 1/16 context stage.
  return 8 * (1 << std::max(pyramid_levels - 1, 1));
}

InternalWidths ModelConfig::internal() const {
  InternalWidths w;
  switch (variant) {
    case Variant::kSmall:
      w.corr_encoder = {24, 32, 64};
      w.coarse_context = 128;
      w.init_hidden = 304;
      w.update_corr = 64;
      w.update_flow = 24;
      w.update_hidden = 64;
      w.update_head = 48;
      w.decoder_hidden = {48, 32, 20};
      break;
    case Variant::kLarge:
      w.corr_encoder = {32, 48, 96};
      w.coarse_context = 160;
      w.init_hidden = 384;
      w.update_corr = 96;
      w.update_flow = 32;
      w.update_hidden = 96;
      w.update_head = 64;
      w.decoder_hidden = {64, 48, 32};
      break;
    case Variant::kGlobal:
      w.corr_encoder = {48, 64, 128};
      w.coarse_context = 192;
      w.init_hidden = 512;
      w.update_corr = 128;
      w.update_flow = 48;
      w.update_hidden = 128;
      w.update_head = 96;
      w.decoder_hidden = {96, 64, 48};
      break;
  }
  return w;
}

}  // namespace amt

#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace amt {

enum class Variant : std::uint8_t { kSmall = 0, kLarge = 1, kGlobal = 2 };

const char* variant_name(Variant v);
bool parse_variant(const std::string& text, Variant& out);

/// Widths that are implied by the variant rather than stored explicitly.
struct InternalWidths {
  std::array<int, 3> corr_encoder{};  // stages at 1/2, 1/4, 1/8
  int coarse_context = 0;             // context stage at 1/16
  int init_hidden = 0;
  int update_corr = 0;
  int update_flow = 0;
  int update_hidden = 0;
  int update_head = 0;
  std::array<int, 3> decoder_hidden{};  // per decoder level
};

struct ModelConfig {
  Variant variant = Variant::kSmall;
  int corr_dim = 84;
  // Context widths for levels 1, 2, 3 (1/8, 1/4, 1/2 of the input).
  std::array<int, 3> context{48, 32, 20};
  int pyramid_levels = 4;
  int radius = 3;
  int num_fields = 3;
  bool upsample_corr_feature = false;

  static constexpr int kNumScales = 3;

  static ModelConfig small();
  static ModelConfig large();
  static ModelConfig global();
  static ModelConfig preset(Variant v);

  /// Throws Error(kInvalidConfig) on any violated invariant.
  void validate() const;

  int context_width(int level) const { return context[level - 1]; }
  int corr_channels() const { return 2 * pyramid_levels * (2 * radius + 1) * (2 * radius + 1); }
  /// Frame sides must be multiples of this value.
  int required_multiple() const;
  InternalWidths internal() const;

  std::uint8_t flags() const { return upsample_corr_feature ? 1u : 0u; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace amt

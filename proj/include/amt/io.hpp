#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amt/model.hpp"
#include "amt/network.hpp"
#include "amt/tensor.hpp"

namespace amt {

// ---------------------------------------------------------------------------
// Weights container
//
//   "AMTW" | version u32 | variant u8 | D u16 | c1 u16 | c2 u16 | c3 u16 |
//   L u8 | r u8 | N u8 | flags u8 | count u32 |
//   count x (name_len u16 | name | rank u8 | dims u32 x rank | f32 payload)
//
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

inline constexpr char kWeightsMagic[4] = {'A', 'M', 'T', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w);
ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelWeights& w, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

Image8 read_image(const std::filesystem::path& path);
/// Format chosen by extension: ".png" writes PNG, anything else binary PPM.
void write_image(const Image8& img, const std::filesystem::path& path);

/// (1, 3, h, w) tensor with values v / 255.
Tensor image_to_tensor(const Image8& img);
/// Clamps to [0, 1], scales by 255 and rounds half to even.
Image8 tensor_to_image(const Tensor& t);

// ---------------------------------------------------------------------------
// Padding
// ---------------------------------------------------------------------------

struct CropBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct Padded {
  Tensor image;
  CropBox crop;
};

/// Replicates the last row/column until both sides are multiples of m.
Padded pad_to_multiple(const Tensor& img, int m);
Tensor crop(const Tensor& img, const CropBox& box);

// ---------------------------------------------------------------------------
// Flow dumps: per plane "AMTF <name> <c> <h> <w>\n" + little-endian f32.
// ---------------------------------------------------------------------------

struct NamedPlane {
  std::string name;
  Tensor data;  // (1, c, h, w)
};

std::vector<NamedPlane> flow_dump_planes(const MultiFieldOutput& out);
void write_flow_dump(const std::vector<NamedPlane>& planes, const std::filesystem::path& path);
std::vector<NamedPlane> read_flow_dump(const std::filesystem::path& path);

}  // namespace amt

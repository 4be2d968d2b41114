#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>

#include "amt/io.hpp"

namespace amt {
namespace {

using FilePtr = std::unique_ptr<std::FILE, decltype(&std::fclose)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode), &std::fclose);
}

bool has_png_signature(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Image8 decode_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  require(file != nullptr, ErrorCode::kIo, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::kDecode, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorCode::kDecode, "libpng initialisation failed");
  }
  Image8 img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kDecode, "corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<std::size_t>(img.width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kDecode, "unsupported PNG layout: " + path.string());
  }
  img.rgb.resize(stride * img.height);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.rgb.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void encode_png(const Image8& img, const std::filesystem::path& path) {
  FilePtr file = open_file(path, "wb");
  require(file != nullptr, ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::kIo, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorCode::kIo, "libpng initialisation failed");
  }
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIo, "failed writing PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Binary (P6) and ASCII (P3) PPM with maxval <= 255.
Image8 decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> int {
    skip_space();
    require(pos < bytes.size() && std::isdigit(bytes[pos]), ErrorCode::kDecode,
            "malformed PPM header in " + name);
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      require(v <= (1 << 24), ErrorCode::kDecode, "PPM value out of range in " + name);
    }
    return static_cast<int>(v);
  };
  require(bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '3'),
          ErrorCode::kDecode, "unsupported image format: " + name);
  const bool binary = bytes[1] == '6';
  pos = 2;
  Image8 img;
  img.width = read_int();
  img.height = read_int();
  const int maxval = read_int();
  require(img.width >= 1 && img.height >= 1, ErrorCode::kDecode, "empty PPM image " + name);
  require(maxval >= 1 && maxval <= 255, ErrorCode::kDecode,
          "PPM maxval must lie in [1, 255] in " + name);
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * 3;
  img.rgb.resize(count);
  if (binary) {
    require(pos < bytes.size() && std::isspace(bytes[pos]), ErrorCode::kDecode,
            "malformed PPM header in " + name);
    ++pos;
    require(bytes.size() - pos >= count, ErrorCode::kDecode, "truncated PPM payload in " + name);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), count, img.rgb.begin());
  } else {
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(std::min(read_int(), maxval));
  }
  if (maxval != 255) {
    for (auto& v : img.rgb) v = static_cast<std::uint8_t>(std::lround(v * 255.0 / maxval));
  }
  return img;
}

void encode_ppm(const Image8& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  require(static_cast<bool>(f), ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace

Image8 read_image(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (has_png_signature(bytes)) return decode_png(path);
  return decode_ppm(bytes, path.string());
}

void write_image(const Image8& img, const std::filesystem::path& path) {
  require(img.rgb.size() == static_cast<std::size_t>(img.width) * img.height * 3,
          ErrorCode::kShapeMismatch, "image payload does not match its dimensions");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    encode_png(img, path);
  } else {
    encode_ppm(img, path);
  }
}

Tensor image_to_tensor(const Image8& img) {
  Tensor t(Shape{1, 3, img.height, img.width});
  const std::size_t hw = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < 3; ++c) {
    auto dst = t.plane(0, c);
    for (std::size_t i = 0; i < hw; ++i) dst[i] = static_cast<float>(img.rgb[3 * i + c]) / 255.0f;
  }
  return t;
}

Image8 tensor_to_image(const Tensor& t) {
  require(t.n() == 1 && t.c() == 3, ErrorCode::kShapeMismatch,
          "image tensors must be (1, 3, H, W), got " + to_string(t.shape()));
  Image8 img;
  img.width = t.w();
  img.height = t.h();
  const std::size_t hw = t.shape().plane();
  img.rgb.resize(hw * 3);
  for (int c = 0; c < 3; ++c) {
    const auto src = t.plane(0, c);
    for (std::size_t i = 0; i < hw; ++i) {
      float v = src[i];
      if (!(v > 0.0f)) v = 0.0f;  // also maps NaN to 0
      if (v > 1.0f) v = 1.0f;
      // Default rounding mode: nearest, ties to even.
      img.rgb[3 * i + c] = static_cast<std::uint8_t>(std::nearbyint(v * 255.0f));
    }
  }
  return img;
}

}  // namespace amt

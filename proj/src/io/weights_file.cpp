#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include "amt/io.hpp"

namespace amt {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u32(bits);
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  std::uint8_t u8(const char* what) { return need(1, what)[0]; }
  std::uint16_t u16(const char* what) {
    const std::uint8_t* p = need(2, what);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    const std::uint8_t* p = need(4, what);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  const std::uint8_t* need(std::size_t n, const char* what) {
    require(buf_.size() - pos_ >= n, ErrorCode::kTruncatedFile,
            std::string("weights file truncated while reading ") + what);
    const std::uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_weights(const ModelWeights& w) {
  w.validate();
  const ModelConfig& cfg = w.config();
  const auto manifest = parameter_manifest(cfg);
  Writer out;
  out.bytes(kWeightsMagic, 4);
  out.u32(kWeightsVersion);
  out.u8(static_cast<std::uint8_t>(cfg.variant));
  out.u16(static_cast<std::uint16_t>(cfg.corr_dim));
  for (int c : cfg.context) out.u16(static_cast<std::uint16_t>(c));
  out.u8(static_cast<std::uint8_t>(cfg.pyramid_levels));
  out.u8(static_cast<std::uint8_t>(cfg.radius));
  out.u8(static_cast<std::uint8_t>(cfg.num_fields));
  out.u8(cfg.flags());
  out.u32(static_cast<std::uint32_t>(manifest.size()));
  for (const ParamSpec& p : manifest) {
    out.u16(static_cast<std::uint16_t>(p.name.size()));
    out.bytes(p.name.data(), p.name.size());
    out.u8(static_cast<std::uint8_t>(p.dims.size()));
    for (auto d : p.dims) out.u32(d);
    for (float v : w.get(p.name).data()) out.f32(v);
  }
  return out.take();
}

ModelWeights deserialize_weights(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  const std::uint8_t* magic = in.need(4, "magic");
  require(std::memcmp(magic, kWeightsMagic, 4) == 0, ErrorCode::kBadMagic,
          "not an AMTW weights file (bad magic)");
  const std::uint32_t version = in.u32("version");
  require(version == kWeightsVersion, ErrorCode::kVersionMismatch,
          "unsupported weights format version " + std::to_string(version) + " (expected " +
              std::to_string(kWeightsVersion) + ")");

  ModelConfig cfg;
  const std::uint8_t variant = in.u8("config");
  require(variant <= 2, ErrorCode::kInvalidConfig,
          "unknown variant id " + std::to_string(variant));
  cfg.variant = static_cast<Variant>(variant);
  cfg.corr_dim = in.u16("config");
  for (int& c : cfg.context) c = in.u16("config");
  cfg.pyramid_levels = in.u8("config");
  cfg.radius = in.u8("config");
  cfg.num_fields = in.u8("config");
  const std::uint8_t flags = in.u8("config");
  require((flags & ~1u) == 0, ErrorCode::kInvalidConfig,
          "unknown config flags " + std::to_string(flags));
  cfg.upsample_corr_feature = (flags & 1u) != 0;
  cfg.validate();

  const auto manifest = parameter_manifest(cfg);
  std::unordered_map<std::string, const ParamSpec*> by_name;
  for (const ParamSpec& p : manifest) by_name[p.name] = &p;

  ModelWeights w(cfg);
  const std::uint32_t count = in.u32("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint16_t len = in.u16("tensor name length");
    const std::uint8_t* name_bytes = in.need(len, "tensor name");
    const std::string name(reinterpret_cast<const char*>(name_bytes), len);
    auto it = by_name.find(name);
    require(it != by_name.end(), ErrorCode::kUnexpectedParameter,
            "unexpected parameter " + name);
    require(!w.contains(name), ErrorCode::kUnexpectedParameter, "duplicate parameter " + name);
    const std::uint8_t rank = in.u8("tensor rank");
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = in.u32("tensor dims");
    require(dims == it->second->dims, ErrorCode::kParameterShape,
            "parameter " + name + " has unexpected dims");
    const Shape shape = shape_for_dims(dims);
    std::vector<float> values(shape.count());
    const std::uint8_t* payload = in.need(values.size() * 4, "tensor payload");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint8_t* p = payload + 4 * i;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      std::memcpy(&values[i], &bits, sizeof bits);
    }
    w.set(name, Tensor(shape, std::move(values)));
  }
  require(in.remaining() == 0, ErrorCode::kDecode, "trailing bytes after the last tensor");
  for (const ParamSpec& p : manifest) {
    require(w.contains(p.name), ErrorCode::kMissingParameter, "missing parameter " + p.name);
  }
  return w;
}

void save_weights(const ModelWeights& w, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(w);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(f), ErrorCode::kIo, "failed writing " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open weights file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

}  // namespace amt

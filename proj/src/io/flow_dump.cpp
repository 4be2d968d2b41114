#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "amt/io.hpp"

namespace amt {

std::vector<NamedPlane> flow_dump_planes(const MultiFieldOutput& out) {
  std::vector<NamedPlane> planes;
  for (std::size_t g = 0; g < out.groups.size(); ++g) {
    const std::string prefix = "group" + std::to_string(g) + ".";
    const FieldGroup& grp = out.groups[g];
    planes.push_back({prefix + "f_t0", grp.f_t0});
    planes.push_back({prefix + "f_t1", grp.f_t1});
    planes.push_back({prefix + "mask", grp.mask});
    planes.push_back({prefix + "residual", grp.residual});
  }
  return planes;
}

void write_flow_dump(const std::vector<NamedPlane>& planes, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  for (const NamedPlane& p : planes) {
    require(p.data.n() == 1, ErrorCode::kShapeMismatch, "dump planes must have batch 1");
    require(!p.name.empty() && p.name.find_first_of(" \n") == std::string::npos,
            ErrorCode::kInvalidArgument, "plane names must be non-empty without whitespace");
    f << "AMTF " << p.name << ' ' << p.data.c() << ' ' << p.data.h() << ' ' << p.data.w() << '\n';
    for (float v : p.data.data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      const char le[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                          static_cast<char>((bits >> 16) & 0xff),
                          static_cast<char>((bits >> 24) & 0xff)};
      f.write(le, 4);
    }
  }
  require(static_cast<bool>(f), ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<NamedPlane> read_flow_dump(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>());
  std::vector<NamedPlane> planes;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto nl = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), '\n');
    require(nl != bytes.end(), ErrorCode::kDecode, "truncated flow dump header");
    std::istringstream header(
        std::string(bytes.begin() + static_cast<std::ptrdiff_t>(pos), nl));
    std::string tag;
    NamedPlane p;
    int c = 0, h = 0, w = 0;
    header >> tag >> p.name >> c >> h >> w;
    require(tag == "AMTF" && header && c >= 0 && h >= 0 && w >= 0, ErrorCode::kDecode,
            "malformed flow dump header");
    pos = static_cast<std::size_t>(nl - bytes.begin()) + 1;
    p.data = Tensor(Shape{1, c, h, w});
    require(bytes.size() - pos >= p.data.size() * 4, ErrorCode::kDecode,
            "truncated flow dump payload for " + p.name);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const std::uint8_t* b = bytes.data() + pos + 4 * i;
      const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      std::memcpy(&p.data[i], &bits, sizeof bits);
    }
    pos += p.data.size() * 4;
    planes.push_back(std::move(p));
  }
  return planes;
}

}  // namespace amt

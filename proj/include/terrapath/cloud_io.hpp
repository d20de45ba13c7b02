#pragma once

// Point-cloud file formats: PLY 1.0 (ascii and binary_little_endian) and
// whitespace-separated XYZ text. Only x, y, z of element "vertex" are read;
// every other property and element is skipped.

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "terrapath/errors.hpp"
#include "terrapath/pointcloud.hpp"

namespace terrapath {

static_assert(std::endian::native == std::endian::little,
              "binary PLY support assumes a little-endian host");

enum class CloudFormat { Auto, PlyAscii, PlyBinaryLE, Xyz };

namespace detail {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

inline bool parse_ply_type(std::string_view name, PlyType& out) {
  struct Entry {
    std::string_view name;
    PlyType type;
  };
  static constexpr Entry kTypes[] = {
      {"char", PlyType::Int8},     {"int8", PlyType::Int8},       {"uchar", PlyType::UInt8},
      {"uint8", PlyType::UInt8},   {"short", PlyType::Int16},     {"int16", PlyType::Int16},
      {"ushort", PlyType::UInt16}, {"uint16", PlyType::UInt16},   {"int", PlyType::Int32},
      {"int32", PlyType::Int32},   {"uint", PlyType::UInt32},     {"uint32", PlyType::UInt32},
      {"float", PlyType::Float32}, {"float32", PlyType::Float32}, {"double", PlyType::Float64},
      {"float64", PlyType::Float64}};
  for (const auto& e : kTypes) {
    if (e.name == name) {
      out = e.type;
      return true;
    }
  }
  return false;
}

inline std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8: return 1;
    case PlyType::Int16:
    case PlyType::UInt16: return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32: return 4;
    case PlyType::Float64: return 8;
  }
  return 0;
}

inline double read_binary_value(const char* p, PlyType t) {
  switch (t) {
    case PlyType::Int8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case PlyType::UInt8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case PlyType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case PlyType::Int32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::UInt32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case PlyType::Float32: { float v; std::memcpy(&v, p, 4); return v; }
    case PlyType::Float64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::uint64_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
};

/// Splits on spaces/tabs and remembers where each token started.
struct Token {
  std::string_view text;
  std::size_t offset;
};

inline std::vector<Token> tokenize_line(std::string_view line, std::size_t base) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back({line.substr(start, i - start), base + start});
  }
  return out;
}

inline PlyHeader parse_ply_header(std::string_view data) {
  PlyHeader h;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  while (true) {
    const std::size_t eol = data.find('\n', pos);
    if (eol == std::string_view::npos) throw ParseError("PLY header not terminated", data.size());
    const auto tokens = tokenize_line(data.substr(pos, eol - pos), pos);
    const std::size_t line_start = pos;
    pos = eol + 1;
    if (first) {
      if (tokens.size() != 1 || tokens[0].text != "ply")
        throw ParseError("missing 'ply' magic", line_start);
      first = false;
      continue;
    }
    if (tokens.empty()) continue;
    const auto kw = tokens[0].text;
    if (kw == "comment" || kw == "obj_info") continue;
    if (kw == "end_header") {
      if (!saw_format) throw ParseError("PLY header lacks a format line", line_start);
      h.body_offset = pos;
      return h;
    }
    if (kw == "format") {
      if (tokens.size() != 3 || tokens[2].text != "1.0")
        throw ParseError("malformed format line", line_start);
      if (tokens[1].text == "ascii") {
        h.binary = false;
      } else if (tokens[1].text == "binary_little_endian") {
        h.binary = true;
      } else {
        throw ParseError("unsupported PLY format '" + std::string(tokens[1].text) + "'",
                         tokens[1].offset);
      }
      saw_format = true;
    } else if (kw == "element") {
      if (tokens.size() != 3) throw ParseError("malformed element line", line_start);
      PlyElement e;
      e.name = std::string(tokens[1].text);
      auto [ptr, ec] = std::from_chars(tokens[2].text.data(),
                                       tokens[2].text.data() + tokens[2].text.size(), e.count);
      if (ec != std::errc() || ptr != tokens[2].text.data() + tokens[2].text.size())
        throw ParseError("bad element count", tokens[2].offset);
      h.elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (h.elements.empty()) throw ParseError("property before any element", line_start);
      PlyProperty p;
      if (tokens.size() == 5 && tokens[1].text == "list") {
        p.is_list = true;
        if (!parse_ply_type(tokens[2].text, p.count_type) || !parse_ply_type(tokens[3].text, p.type))
          throw ParseError("unknown property type", tokens[2].offset);
        if (p.count_type == PlyType::Float32 || p.count_type == PlyType::Float64)
          throw ParseError("list count must be an integer type", tokens[2].offset);
        p.name = std::string(tokens[4].text);
      } else if (tokens.size() == 3) {
        if (!parse_ply_type(tokens[1].text, p.type))
          throw ParseError("unknown property type '" + std::string(tokens[1].text) + "'",
                           tokens[1].offset);
        p.name = std::string(tokens[2].text);
      } else {
        throw ParseError("malformed property line", line_start);
      }
      h.elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unknown header keyword '" + std::string(kw) + "'", tokens[0].offset);
    }
  }
}

struct VertexLayout {
  std::size_t element = 0;
  int x = -1;
  int y = -1;
  int z = -1;
};

inline VertexLayout locate_vertex(const PlyHeader& h) {
  VertexLayout v;
  bool found = false;
  for (std::size_t e = 0; e < h.elements.size(); ++e) {
    if (h.elements[e].name != "vertex") continue;
    found = true;
    v.element = e;
    const auto& props = h.elements[e].properties;
    for (std::size_t i = 0; i < props.size(); ++i) {
      int* slot = props[i].name == "x" ? &v.x : props[i].name == "y" ? &v.y
                : props[i].name == "z" ? &v.z : nullptr;
      if (!slot) continue;
      if (props[i].is_list ||
          (props[i].type != PlyType::Float32 && props[i].type != PlyType::Float64))
        throw ParseError("vertex coordinate '" + props[i].name + "' must be float or double",
                         h.body_offset);
      *slot = static_cast<int>(i);
    }
    break;
  }
  if (!found) throw ParseError("PLY has no 'vertex' element", h.body_offset);
  if (v.x < 0 || v.y < 0 || v.z < 0)
    throw ParseError("vertex element lacks x, y or z", h.body_offset);
  return v;
}

inline void check_finite(double v, std::size_t offset) {
  if (!std::isfinite(v)) throw ParseError("non-finite coordinate", offset);
}

inline PointCloud parse_ply_binary(std::string_view data, const PlyHeader& h,
                                   const VertexLayout& layout) {
  PointCloud cloud;
  std::size_t pos = h.body_offset;
  auto need = [&](std::size_t n) {
    if (data.size() - pos < n) throw ParseError("truncated PLY payload", data.size());
  };
  for (std::size_t e = 0; e <= layout.element; ++e) {
    const auto& el = h.elements[e];
    const bool is_vertex = e == layout.element;
    if (is_vertex) {
      std::size_t record = 0;
      for (const auto& p : el.properties)
        record += p.is_list ? ply_type_size(p.count_type) : ply_type_size(p.type);
      if (record > 0 && el.count > (data.size() - pos) / record)
        throw ParseError("truncated PLY payload", data.size());
      cloud.points.reserve(static_cast<std::size_t>(el.count));
    }
    for (std::uint64_t r = 0; r < el.count; ++r) {
      double xyz[3] = {0, 0, 0};
      std::size_t offs[3] = {0, 0, 0};
      for (std::size_t pi = 0; pi < el.properties.size(); ++pi) {
        const auto& p = el.properties[pi];
        if (p.is_list) {
          const std::size_t cs = ply_type_size(p.count_type);
          need(cs);
          const double n = read_binary_value(data.data() + pos, p.count_type);
          pos += cs;
          if (n < 0) throw ParseError("negative list length", pos - cs);
          const std::size_t bytes = static_cast<std::size_t>(n) * ply_type_size(p.type);
          need(bytes);
          pos += bytes;
          continue;
        }
        const std::size_t sz = ply_type_size(p.type);
        need(sz);
        if (is_vertex) {
          const int ip = static_cast<int>(pi);
          const int axis = ip == layout.x ? 0 : ip == layout.y ? 1 : ip == layout.z ? 2 : -1;
          if (axis >= 0) {
            xyz[axis] = read_binary_value(data.data() + pos, p.type);
            offs[axis] = pos;
          }
        }
        pos += sz;
      }
      if (is_vertex) {
        for (int a = 0; a < 3; ++a) check_finite(xyz[a], offs[a]);
        cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
      }
    }
  }
  return cloud;
}

/// Sequential token reader over an ASCII body that tracks byte offsets.
class AsciiCursor {
 public:
  AsciiCursor(std::string_view data, std::size_t pos) : data_(data), pos_(pos) {}

  Token next() {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ >= data_.size()) throw ParseError("truncated PLY payload", data_.size());
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    return {data_.substr(start, pos_ - start), start};
  }

  double number() {
    const Token t = next();
    double v = 0.0;
    const char* end = t.text.data() + t.text.size();
    auto [ptr, ec] = std::from_chars(t.text.data(), end, v);
    if (ec == std::errc::result_out_of_range) throw ParseError("non-finite coordinate", t.offset);
    if (ec != std::errc() || ptr != end)
      throw ParseError("invalid number '" + std::string(t.text) + "'", t.offset);
    last_offset_ = t.offset;
    return v;
  }

  std::size_t last_offset() const noexcept { return last_offset_; }

 private:
  std::string_view data_;
  std::size_t pos_;
  std::size_t last_offset_ = 0;
};

inline PointCloud parse_ply_ascii(std::string_view data, const PlyHeader& h,
                                  const VertexLayout& layout) {
  PointCloud cloud;
  AsciiCursor cur(data, h.body_offset);
  for (std::size_t e = 0; e <= layout.element; ++e) {
    const auto& el = h.elements[e];
    const bool is_vertex = e == layout.element;
    if (is_vertex)
      cloud.points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(el.count, data.size())));
    for (std::uint64_t r = 0; r < el.count; ++r) {
      double xyz[3] = {0, 0, 0};
      for (std::size_t pi = 0; pi < el.properties.size(); ++pi) {
        const auto& p = el.properties[pi];
        if (p.is_list) {
          const double n = cur.number();
          if (n < 0 || n != std::floor(n)) throw ParseError("bad list length", cur.last_offset());
          for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) cur.next();
          continue;
        }
        const double v = cur.number();
        if (!is_vertex) continue;
        const int ip = static_cast<int>(pi);
        const int axis = ip == layout.x ? 0 : ip == layout.y ? 1 : ip == layout.z ? 2 : -1;
        if (axis >= 0) {
          check_finite(v, cur.last_offset());
          xyz[axis] = v;
        }
      }
      if (is_vertex) cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
    }
  }
  return cloud;
}

}  // namespace detail

inline PointCloud parse_ply(std::string_view data, CloudFormat expect = CloudFormat::Auto) {
  const auto header = detail::parse_ply_header(data);
  if (expect == CloudFormat::PlyAscii && header.binary)
    throw ParseError("expected ascii PLY, found binary_little_endian", 0);
  if (expect == CloudFormat::PlyBinaryLE && !header.binary)
    throw ParseError("expected binary_little_endian PLY, found ascii", 0);
  const auto layout = detail::locate_vertex(header);
  return header.binary ? detail::parse_ply_binary(data, header, layout)
                       : detail::parse_ply_ascii(data, header, layout);
}

/// One point per non-blank line: x y z [ignored columns...]. '#' starts a comment line.
inline PointCloud parse_xyz(std::string_view data) {
  PointCloud cloud;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t eol = data.find('\n', pos);
    if (eol == std::string_view::npos) eol = data.size();
    const auto tokens = detail::tokenize_line(data.substr(pos, eol - pos), pos);
    const std::size_t line_start = pos;
    pos = eol + 1;
    if (tokens.empty() || tokens[0].text.front() == '#') continue;
    if (tokens.size() < 3) throw ParseError("XYZ line needs three coordinates", line_start);
    double xyz[3];
    for (int a = 0; a < 3; ++a) {
      const auto& t = tokens[a];
      const char* end = t.text.data() + t.text.size();
      auto [ptr, ec] = std::from_chars(t.text.data(), end, xyz[a]);
      if (ec == std::errc::result_out_of_range) throw ParseError("non-finite coordinate", t.offset);
      if (ec != std::errc() || ptr != end)
        throw ParseError("invalid number '" + std::string(t.text) + "'", t.offset);
      detail::check_finite(xyz[a], t.offset);
    }
    cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
  }
  return cloud;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline PointCloud load_cloud(const std::filesystem::path& path,
                             CloudFormat format = CloudFormat::Auto) {
  const std::string data = read_file(path);
  if (format == CloudFormat::Xyz) return parse_xyz(data);
  if (format == CloudFormat::Auto && data.rfind("ply", 0) != 0) return parse_xyz(data);
  return parse_ply(data, format);
}

/// Binary little-endian PLY with float64 x, y, z.
inline std::string encode_ply_binary(const PointCloud& cloud) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  const std::size_t header = out.size();
  out.resize(header + cloud.size() * 3 * sizeof(double));
  char* dst = out.data() + header;
  for (const auto& p : cloud.points) {
    const double v[3] = {p.x, p.y, p.z};
    std::memcpy(dst, v, sizeof v);
    dst += sizeof v;
  }
  return out;
}

/// ASCII PLY using shortest round-trip decimal text.
inline std::string encode_ply_ascii(const PointCloud& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  char buf[64];
  for (const auto& p : cloud.points) {
    const double v[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v[a]);
      out.append(buf, ptr);
      out.push_back(a == 2 ? '\n' : ' ');
    }
  }
  return out;
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves partial output at `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed for '" + path.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

inline void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  write_file_atomic(path, encode_ply_binary(cloud));
}

}  // namespace terrapath

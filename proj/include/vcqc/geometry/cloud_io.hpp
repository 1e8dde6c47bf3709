// vcqc - virtual camera quality control for printed filaments
//
// Point cloud file I/O: PLY 1.0 (ascii, binary_little_endian) and
// whitespace-separated XYZ text.
//
// Recognised vertex properties:
//   x y z                 coordinates (any numeric type)
//   red green blue        -> Rgb8
//   intensity             -> Intensity (min-max normalized unless already in [0,1])
//   scalar | scalar_*     -> SignedDistance (metres)
//   label                 -> optional per-point instance label
// Anything else (normals, alpha, ...) is skipped. A cloud without color gets
// a constant intensity of 0.5.

#ifndef VCQC_GEOMETRY_CLOUD_IO_HPP
#define VCQC_GEOMETRY_CLOUD_IO_HPP

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vcqc/geometry/point_cloud.hpp"

namespace vcqc {

enum class CloudFormat { Auto, PlyAscii, PlyBinaryLE, XyzText };

inline CloudFormat parse_cloud_format(std::string_view s) {
  if (s == "auto" || s.empty()) return CloudFormat::Auto;
  if (s == "ply_ascii") return CloudFormat::PlyAscii;
  if (s == "ply_binary_le" || s == "ply_binary") return CloudFormat::PlyBinaryLE;
  if (s == "ply") return CloudFormat::Auto;
  if (s == "xyz" || s == "xyz_text") return CloudFormat::XyzText;
  throw InvalidArgument("unknown cloud format '" + std::string(s) + "'");
}

struct LoadedCloud {
  PointCloud cloud;
  std::optional<std::vector<std::uint32_t>> labels;
};

namespace detail {

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::I8;
  if (s == "uchar" || s == "uint8") return PlyType::U8;
  if (s == "short" || s == "int16") return PlyType::I16;
  if (s == "ushort" || s == "uint16") return PlyType::U16;
  if (s == "int" || s == "int32") return PlyType::I32;
  if (s == "uint" || s == "uint32") return PlyType::U32;
  if (s == "float" || s == "float32") return PlyType::F32;
  if (s == "double" || s == "float64") return PlyType::F64;
  return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::I8: case PlyType::U8: return 1;
    case PlyType::I16: case PlyType::U16: return 2;
    case PlyType::I32: case PlyType::U32: case PlyType::F32: return 4;
    case PlyType::F64: return 8;
  }
  return 0;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    std::reverse(buf, buf + sizeof(T));
  }
  out.append(buf, sizeof(T));
}

inline double decode_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::I8: return load_le<std::int8_t>(p);
    case PlyType::U8: return load_le<std::uint8_t>(p);
    case PlyType::I16: return load_le<std::int16_t>(p);
    case PlyType::U16: return load_le<std::uint16_t>(p);
    case PlyType::I32: return load_le<std::int32_t>(p);
    case PlyType::U32: return load_le<std::uint32_t>(p);
    case PlyType::F32: return load_le<float>(p);
    case PlyType::F64: return load_le<double>(p);
  }
  return 0.0;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline bool parse_double(std::string_view tok, double& out) {
  // from_chars for double is available in libstdc++ >= 11.
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

/// Min-max normalization; a constant channel maps to 0.5.
inline void normalize_min_max(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double a = *lo, b = *hi;
  for (double& x : v) x = (b > a) ? (x - a) / (b - a) : 0.5;
}

inline bool all_unit(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
}

struct PlyProperty {
  PlyType type;
  std::string name;
};

enum class Role { Skip, X, Y, Z, R, G, B, Intensity, Scalar, Label };

inline Role role_of(const std::string& name) {
  if (name == "x") return Role::X;
  if (name == "y") return Role::Y;
  if (name == "z") return Role::Z;
  if (name == "red" || name == "r") return Role::R;
  if (name == "green" || name == "g") return Role::G;
  if (name == "blue" || name == "b") return Role::B;
  if (name == "intensity" || name == "scalar_intensity") return Role::Intensity;
  if (name == "scalar" || name.rfind("scalar_", 0) == 0) return Role::Scalar;
  if (name == "label") return Role::Label;
  return Role::Skip;
}

class CloudBuilder {
 public:
  explicit CloudBuilder(const std::vector<PlyProperty>& props) {
    for (const auto& p : props) roles_.push_back(role_of(p.name));
    auto has = [&](Role r) { return std::find(roles_.begin(), roles_.end(), r) != roles_.end(); };
    has_xyz_ = has(Role::X) && has(Role::Y) && has(Role::Z);
    has_rgb_ = has(Role::R) && has(Role::G) && has(Role::B);
    has_intensity_ = has(Role::Intensity);
    has_scalar_ = has(Role::Scalar);
    has_label_ = has(Role::Label);
  }

  [[nodiscard]] bool has_xyz() const { return has_xyz_; }

  /// `values[k]` is the k-th property of one record.
  void add(const std::vector<double>& values, const std::string& where) {
    Vec3 p;
    double r = 0, g = 0, b = 0, inten = 0, scal = 0, lab = 0;
    for (std::size_t k = 0; k < roles_.size(); ++k) {
      const double v = values[k];
      switch (roles_[k]) {
        case Role::X: p.x() = v; break;
        case Role::Y: p.y() = v; break;
        case Role::Z: p.z() = v; break;
        case Role::R: r = v; break;
        case Role::G: g = v; break;
        case Role::B: b = v; break;
        case Role::Intensity: inten = v; break;
        case Role::Scalar: scal = v; break;
        case Role::Label: lab = v; break;
        case Role::Skip: break;
      }
    }
    if (!p.allFinite()) throw DataError(where + ": non-finite coordinate");
    pts_.push_back(p);
    if (has_rgb_) {
      auto clamp8 = [](double x) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(x), 0L, 255L));
      };
      rgb_.push_back({clamp8(r), clamp8(g), clamp8(b)});
    } else if (has_intensity_) {
      if (!std::isfinite(inten)) throw DataError(where + ": non-finite intensity");
      scalar_.push_back(inten);
    } else if (has_scalar_) {
      if (!std::isfinite(scal)) throw DataError(where + ": non-finite scalar");
      scalar_.push_back(scal);
    }
    if (has_label_) {
      if (!(lab >= 0) || lab > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError(where + ": invalid label");
      }
      labels_.push_back(static_cast<std::uint32_t>(lab));
    }
  }

  LoadedCloud finish(bool normalize_always) {
    ColorAttr colors;
    if (has_rgb_) {
      colors = ColorAttr::from_rgb(std::move(rgb_));
    } else if (has_intensity_) {
      if (normalize_always || !all_unit(scalar_)) normalize_min_max(scalar_);
      colors = ColorAttr::from_intensity(std::move(scalar_));
    } else if (has_scalar_) {
      colors = ColorAttr::from_signed_distance(std::move(scalar_));
    } else {
      colors = ColorAttr::from_intensity(std::vector<double>(pts_.size(), 0.5));
    }
    LoadedCloud out{PointCloud(std::move(pts_), std::move(colors)), std::nullopt};
    if (has_label_) out.labels = std::move(labels_);
    return out;
  }

 private:
  std::vector<Role> roles_;
  bool has_xyz_{false}, has_rgb_{false}, has_intensity_{false}, has_scalar_{false},
      has_label_{false};
  std::vector<Vec3> pts_;
  std::vector<Rgb8> rgb_;
  std::vector<double> scalar_;
  std::vector<std::uint32_t> labels_;
};

inline LoadedCloud parse_ply(const std::string& data, const std::string& name,
                             CloudFormat expect) {
  std::size_t pos = 0;
  int line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= data.size()) return false;
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    line = std::string_view(data).substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(name + ":" + std::to_string(line_no) + ": " + msg);
  };

  std::string_view line;
  if (!next_line(line) || line != "ply") throw fail("missing 'ply' magic");

  bool binary = false, have_format = false;
  bool in_vertex = false, seen_other_element = false, have_vertex = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  while (true) {
    if (!next_line(line)) throw fail("unterminated header");
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "end_header") break;
    if (toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "format") {
      if (toks.size() != 3) throw fail("malformed format line");
      if (toks[1] == "ascii") {
        binary = false;
      } else if (toks[1] == "binary_little_endian") {
        binary = true;
      } else {
        throw fail("unsupported format '" + std::string(toks[1]) + "'");
      }
      have_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw fail("malformed element line");
      in_vertex = toks[1] == "vertex";
      if (in_vertex) {
        if (seen_other_element) throw fail("vertex element must come first");
        double n = 0;
        if (!parse_double(toks[2], n) || n < 0 || n != std::floor(n)) {
          throw fail("bad vertex count");
        }
        vertex_count = static_cast<std::size_t>(n);
        have_vertex = true;
      } else {
        seen_other_element = true;
      }
    } else if (toks[0] == "property") {
      if (!in_vertex) continue;
      if (toks.size() >= 2 && toks[1] == "list") throw fail("list property on vertex");
      if (toks.size() != 3) throw fail("malformed property line");
      auto t = ply_type(toks[1]);
      if (!t) throw fail("unknown property type '" + std::string(toks[1]) + "'");
      props.push_back({*t, std::string(toks[2])});
    } else {
      throw fail("unexpected header keyword '" + std::string(toks[0]) + "'");
    }
  }
  if (!have_format) throw fail("missing format line");
  if (!have_vertex) throw fail("missing vertex element");
  if (expect == CloudFormat::PlyAscii && binary) throw fail("expected ascii PLY");
  if (expect == CloudFormat::PlyBinaryLE && !binary) throw fail("expected binary PLY");

  CloudBuilder builder(props);
  if (!builder.has_xyz()) throw fail("vertex element lacks x/y/z");
  std::vector<double> values(props.size());

  if (binary) {
    std::size_t stride = 0;
    for (const auto& p : props) stride += ply_size(p.type);
    if (data.size() - std::min(pos, data.size()) < stride * vertex_count) {
      throw DataError(name + ": binary body truncated (need " +
                      std::to_string(vertex_count) + " records)");
    }
    const char* base = data.data() + pos;
    for (std::size_t i = 0; i < vertex_count; ++i) {
      const char* rec = base + i * stride;
      std::size_t off = 0;
      for (std::size_t k = 0; k < props.size(); ++k) {
        values[k] = decode_binary(props[k].type, rec + off);
        off += ply_size(props[k].type);
      }
      builder.add(values, name + ": record " + std::to_string(i));
    }
  } else {
    for (std::size_t i = 0; i < vertex_count; ++i) {
      if (!next_line(line)) throw fail("expected " + std::to_string(vertex_count) + " vertices");
      auto toks = split_ws(line);
      if (toks.size() != props.size()) {
        throw fail("expected " + std::to_string(props.size()) + " values, got " +
                   std::to_string(toks.size()));
      }
      for (std::size_t k = 0; k < toks.size(); ++k) {
        if (!parse_double(toks[k], values[k])) {
          throw fail("cannot parse '" + std::string(toks[k]) + "'");
        }
      }
      builder.add(values, name + ":" + std::to_string(line_no));
    }
  }
  return builder.finish(false);
}

inline LoadedCloud parse_xyz(const std::string& data, const std::string& name) {
  std::vector<PlyProperty> props4{{PlyType::F64, "x"}, {PlyType::F64, "y"},
                                  {PlyType::F64, "z"}, {PlyType::F64, "intensity"}};
  std::vector<PlyProperty> props3(props4.begin(), props4.begin() + 3);
  std::optional<CloudBuilder> builder;
  std::size_t columns = 0;
  std::vector<double> values;
  std::istringstream in(data);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    if (columns == 0) {
      columns = toks.size();
      if (columns != 3 && columns != 4) {
        throw DataError(where + ": expected 3 or 4 columns, got " + std::to_string(columns));
      }
      builder.emplace(columns == 4 ? props4 : props3);
      values.resize(columns);
    } else if (toks.size() != columns) {
      throw DataError(where + ": expected " + std::to_string(columns) + " columns, got " +
                      std::to_string(toks.size()));
    }
    for (std::size_t k = 0; k < columns; ++k) {
      if (!parse_double(toks[k], values[k])) {
        throw DataError(where + ": cannot parse '" + std::string(toks[k]) + "'");
      }
    }
    builder->add(values, where);
  }
  if (!builder) builder.emplace(props3);
  return builder->finish(true);
}

}  // namespace detail

/// Loads a cloud plus the optional `label` property.
inline LoadedCloud read_cloud(const std::filesystem::path& path,
                              CloudFormat format = CloudFormat::Auto) {
  const std::string data = detail::read_file(path);
  const std::string name = path.string();
  if (format == CloudFormat::XyzText ||
      (format == CloudFormat::Auto && data.rfind("ply", 0) != 0)) {
    return detail::parse_xyz(data, name);
  }
  return detail::parse_ply(data, name, format);
}

inline PointCloud load_point_cloud(const std::filesystem::path& path,
                                   CloudFormat format = CloudFormat::Auto) {
  return read_cloud(path, format).cloud;
}

enum class PlyEncoding { Ascii, BinaryLE };

/**
 * @brief Serializes a cloud as PLY. Coordinates and scalar attributes are
 * written as double so binary files round-trip bit-exactly; ascii uses 17
 * significant digits, which also round-trips.
 */
inline std::string encode_ply(const PointCloud& cloud, PlyEncoding enc,
                              const std::vector<std::uint32_t>* labels = nullptr) {
  if (labels && labels->size() != cloud.size()) {
    throw InvalidArgument("encode_ply: label count mismatch");
  }
  const ColorKind kind = cloud.colors().kind;
  std::ostringstream h;
  h << "ply\nformat " << (enc == PlyEncoding::Ascii ? "ascii" : "binary_little_endian")
    << " 1.0\ncomment vcqc\nelement vertex " << cloud.size()
    << "\nproperty double x\nproperty double y\nproperty double z\n";
  switch (kind) {
    case ColorKind::Rgb8:
      h << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
      break;
    case ColorKind::Intensity: h << "property double intensity\n"; break;
    case ColorKind::SignedDistance: h << "property double scalar\n"; break;
  }
  if (labels) h << "property uint label\n";
  h << "end_header\n";
  std::string out = std::move(h).str();

  const auto& c = cloud.colors();
  if (enc == PlyEncoding::BinaryLE) {
    out.reserve(out.size() + cloud.size() * 36);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.point(i);
      for (int k = 0; k < 3; ++k) detail::store_le<double>(out, p[k]);
      if (kind == ColorKind::Rgb8) {
        out.push_back(static_cast<char>(c.rgb[i].r));
        out.push_back(static_cast<char>(c.rgb[i].g));
        out.push_back(static_cast<char>(c.rgb[i].b));
      } else {
        detail::store_le<double>(out, c.scalar[i]);
      }
      if (labels) detail::store_le<std::uint32_t>(out, (*labels)[i]);
    }
    return out;
  }
  std::ostringstream body;
  body << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.point(i);
    body << p.x() << ' ' << p.y() << ' ' << p.z();
    if (kind == ColorKind::Rgb8) {
      body << ' ' << int(c.rgb[i].r) << ' ' << int(c.rgb[i].g) << ' ' << int(c.rgb[i].b);
    } else {
      body << ' ' << c.scalar[i];
    }
    if (labels) body << ' ' << (*labels)[i];
    body << '\n';
  }
  return out + std::move(body).str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

inline void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
                     PlyEncoding enc = PlyEncoding::BinaryLE,
                     const std::vector<std::uint32_t>* labels = nullptr) {
  write_file(path, encode_ply(cloud, enc, labels));
}

/// XYZ text; the 4th column carries the scalar attribute (RGB is dropped).
inline void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream out;
  out << std::setprecision(17);
  const auto& c = cloud.colors();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.point(i);
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (c.kind != ColorKind::Rgb8) out << ' ' << c.scalar[i];
    out << '\n';
  }
  write_file(path, std::move(out).str());
}

}  // namespace vcqc

#endif  // VCQC_GEOMETRY_CLOUD_IO_HPP

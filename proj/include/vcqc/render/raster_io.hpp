// vcqc - virtual camera quality control for printed filaments
//
// Binary raster exports.
//
//   index raster: "VCIDX1", uint32 W, uint32 H, W*H uint32 (0xFFFFFFFF = empty)
//   depth raster: "VCDPT1", uint32 W, uint32 H, W*H float32 metres (+inf = empty)
//
// All integers and floats little-endian, rows top to bottom.

#ifndef VCQC_RENDER_RASTER_IO_HPP
#define VCQC_RENDER_RASTER_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "vcqc/geometry/cloud_io.hpp"
#include "vcqc/render/image.hpp"

namespace vcqc {

inline constexpr std::string_view kIndexMagic = "VCIDX1";
inline constexpr std::string_view kDepthMagic = "VCDPT1";

namespace detail {

template <typename Stored, typename T>
std::string encode_raster(std::string_view magic, const Raster<T>& r) {
  std::string out(magic);
  out.reserve(out.size() + 8 + r.data.size() * sizeof(Stored));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.width));
  store_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.height));
  for (const T& v : r.data) store_le<Stored>(out, static_cast<Stored>(v));
  return out;
}

template <typename Stored, typename T>
Raster<T> decode_raster(std::string_view magic, const std::string& data, const std::string& name) {
  const std::size_t head = magic.size() + 8;
  if (data.size() < head || std::string_view(data).substr(0, magic.size()) != magic) {
    throw DataError(name + ": missing " + std::string(magic) + " header");
  }
  const auto w = load_le<std::uint32_t>(data.data() + magic.size());
  const auto h = load_le<std::uint32_t>(data.data() + magic.size() + 4);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20) ||
      data.size() != head + n * sizeof(Stored)) {
    throw DataError(name + ": raster size does not match header " + std::to_string(w) + "x" +
                    std::to_string(h));
  }
  Raster<T> r(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < n; ++i) {
    r.data[i] = static_cast<T>(load_le<Stored>(data.data() + head + i * sizeof(Stored)));
  }
  return r;
}

}  // namespace detail

inline std::string encode_index_raster(const Raster<std::uint32_t>& r) {
  return detail::encode_raster<std::uint32_t>(kIndexMagic, r);
}
inline std::string encode_depth_raster(const Raster<double>& r) {
  return detail::encode_raster<float>(kDepthMagic, r);
}

inline void write_index_raster(const std::filesystem::path& path, const Raster<std::uint32_t>& r) {
  write_file(path, encode_index_raster(r));
}
inline void write_depth_raster(const std::filesystem::path& path, const Raster<double>& r) {
  write_file(path, encode_depth_raster(r));
}

inline Raster<std::uint32_t> read_index_raster(const std::filesystem::path& path) {
  return detail::decode_raster<std::uint32_t, std::uint32_t>(kIndexMagic, detail::read_file(path),
                                                             path.string());
}
/// Depth comes back as float32 precision widened to double.
inline Raster<double> read_depth_raster(const std::filesystem::path& path) {
  return detail::decode_raster<float, double>(kDepthMagic, detail::read_file(path), path.string());
}

}  // namespace vcqc

#endif  // VCQC_RENDER_RASTER_IO_HPP

// vcqc - virtual camera quality control for printed filaments
//
// Plain row-major raster containers and PNG I/O (libpng simplified API).

#ifndef VCQC_RENDER_IMAGE_HPP
#define VCQC_RENDER_IMAGE_HPP

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vcqc/error.hpp"

namespace vcqc {

/// Row-major W x H raster of T.
template <typename T>
struct Raster {
  int width{0};
  int height{0};
  std::vector<T> data;

  Raster() = default;
  Raster(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  T& at(int x, int y) { return data[index(x, y)]; }
  const T& at(int x, int y) const { return data[index(x, y)]; }
  [[nodiscard]] bool in_bounds(long x, long y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  /// Copy of the rectangle [x0, x0+w) x [y0, y0+h); must lie inside.
  [[nodiscard]] Raster crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || x0 + w > width || y0 + h > height) {
      throw InvalidArgument("Raster::crop: rectangle outside raster");
    }
    Raster out(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(x, y) = at(x0 + x, y0 + y);
    }
    return out;
  }

  friend bool operator==(const Raster&, const Raster&) = default;
};

/// 8-bit RGB image, 3 interleaved bytes per pixel.
struct RgbImage {
  int width{0};
  int height{0};
  std::vector<std::uint8_t> rgb;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* px(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* px(int x, int y) const {
    return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  [[nodiscard]] RgbImage crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || x0 + w > width || y0 + h > height) {
      throw InvalidArgument("RgbImage::crop: rectangle outside image");
    }
    RgbImage out(w, h);
    for (int y = 0; y < h; ++y) {
      std::copy_n(px(x0, y0 + y), static_cast<std::size_t>(w) * 3, out.px(0, y));
    }
    return out;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

inline void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError(path.string() + ": PNG write failed: " + msg);
  }
}

inline RgbImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw DataError(path.string() + ": cannot read PNG: " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError(path.string() + ": PNG decode failed: " + msg);
  }
  return out;
}

}  // namespace vcqc

#endif  // VCQC_RENDER_IMAGE_HPP

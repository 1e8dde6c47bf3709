// vcqc - virtual camera quality control for printed filaments
//
// Instance masks and their run-length encoding.
//
// RLE layout: row-major runs that alternate background / foreground, always
// starting with a background run (which may be 0). The runs sum to W*H.
// Example: a 3x3 mask with only the center set encodes as [4, 1, 4].

#ifndef VCQC_SEGMENTATION_MASK_HPP
#define VCQC_SEGMENTATION_MASK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vcqc/error.hpp"
#include "vcqc/render/image.hpp"

namespace vcqc {

using Bitmap = Raster<std::uint8_t>;  // 0 = background, nonzero = foreground

inline std::vector<std::uint32_t> rle_encode(const Bitmap& bits) {
  std::vector<std::uint32_t> runs;
  bool fg = false;
  std::uint32_t run = 0;
  for (std::uint8_t v : bits.data) {
    const bool on = v != 0;
    if (on != fg) {
      runs.push_back(run);
      run = 0;
      fg = on;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

/// Throws DataError when the runs do not sum to width*height.
inline Bitmap rle_decode(const std::vector<std::uint32_t>& runs, int width, int height) {
  if (width < 1 || height < 1) throw DataError("rle: invalid dimensions");
  const std::size_t total = static_cast<std::size_t>(width) * height;
  std::size_t sum = 0;
  for (std::uint32_t r : runs) sum += r;
  if (sum != total) {
    throw DataError("rle: runs sum to " + std::to_string(sum) + ", expected " +
                    std::to_string(total));
  }
  Bitmap out(width, height, 0);
  std::size_t pos = 0;
  bool fg = false;
  for (std::uint32_t r : runs) {
    if (fg) std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(pos), r, std::uint8_t{1});
    pos += r;
    fg = !fg;
  }
  return out;
}

inline std::size_t foreground_area(const Bitmap& bits) {
  std::size_t n = 0;
  for (std::uint8_t v : bits.data) n += (v != 0);
  return n;
}

/// Coordinate frame of a mask: a tile anchored at `origin`, or the full image.
struct MaskFrame {
  bool global{true};
  int x0{0};
  int y0{0};

  static MaskFrame tile(int x0, int y0) { return {false, x0, y0}; }
  friend bool operator==(const MaskFrame&, const MaskFrame&) = default;
};

/// One filament instance.
struct InstanceMask {
  std::uint32_t id{0};
  Bitmap bits;
  double confidence{0.0};
  MaskFrame frame;

  [[nodiscard]] int width() const { return bits.width; }
  [[nodiscard]] int height() const { return bits.height; }
  [[nodiscard]] std::size_t area() const { return foreground_area(bits); }
};

enum class Backend { Baseline, External };

struct SegmentationResult {
  std::string image_id;
  int width{0};
  int height{0};
  MaskFrame frame;
  Backend backend{Backend::Baseline};
  std::vector<InstanceMask> masks;
};

/// Masks failing either bound are dropped; survivors keep their order.
inline SegmentationResult filter_masks(const SegmentationResult& in, std::size_t min_area_px,
                                       double min_conf) {
  SegmentationResult out = in;
  out.masks.clear();
  for (const auto& m : in.masks) {
    if (m.area() >= min_area_px && m.confidence >= min_conf) out.masks.push_back(m);
  }
  return out;
}

}  // namespace vcqc

#endif  // VCQC_SEGMENTATION_MASK_HPP

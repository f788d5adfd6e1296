#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lesionforge {

enum class PixelDomain : std::uint8_t {
  Natural8,    // photographs, 8-bit gray or RGB
  HUOffset16,  // CT slice, sample = HU + 32768
};

inline constexpr int kHuOffset = 32768;

// Integer raster as stored on disk. Samples are row-major and channel-interleaved.
// 8-bit images keep their samples in [0, 255] inside the 16-bit container.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  int depth = 8;  // bits per sample: 8 or 16
  PixelDomain domain = PixelDomain::Natural8;
  std::vector<std::uint16_t> samples;

  Image() = default;
  Image(int w, int h, int c, int bits, PixelDomain d = PixelDomain::Natural8)
      : width(w), height(h), channels(c), depth(bits), domain(d),
        samples(static_cast<std::size_t>(w) * h * c, 0) {
    validate();
  }

  static Image ct(int w, int h) { return Image(w, h, 1, 16, PixelDomain::HUOffset16); }

  std::uint32_t max_value() const { return depth == 16 ? 65535u : 255u; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  std::uint16_t& at(int x, int y, int c = 0) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint16_t at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  void validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");
    if (depth != 8 && depth != 16) throw std::invalid_argument("image depth must be 8 or 16 bits");
    if (domain == PixelDomain::HUOffset16 && (channels != 1 || depth != 16))
      throw std::invalid_argument("HU-offset images must be 16-bit single channel");
    if (samples.size() != pixel_count() * channels)
      throw std::invalid_argument("sample count does not match image dimensions");
    if (depth == 8 &&
        std::any_of(samples.begin(), samples.end(), [](std::uint16_t s) { return s > 255; }))
      throw std::invalid_argument("8-bit image holds a sample above 255");
  }

  friend bool operator==(const Image&, const Image&) = default;
};

// Per-pixel {0,1} raster.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("mask dimensions must be positive");
  }

  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  std::size_t area() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }
  bool empty() const { return area() == 0; }
  bool is_binary() const {
    return std::all_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b <= 1; });
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Working raster for all compositing math, samples in [0, 1].
struct FloatRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> values;

  FloatRaster() = default;
  FloatRaster(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        values(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("raster dimensions must be positive");
    if (c != 1 && c != 3) throw std::invalid_argument("raster must have 1 or 3 channels");
  }

  float& at(int x, int y, int c = 0) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const FloatRaster&, const FloatRaster&) = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline BinaryMask mask_inverse(const BinaryMask& m) {
  BinaryMask out = m;
  for (auto& b : out.bits) b = static_cast<std::uint8_t>(1 - b);
  return out;
}

inline FloatRaster to_float(const Image& img) {
  FloatRaster out(img.width, img.height, img.channels);
  const double scale = 1.0 / img.max_value();
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    out.values[i] = static_cast<float>(img.samples[i] * scale);
  return out;
}

// Clamp to [0,1] then round half up onto the integer grid of `max_value`.
inline std::uint16_t quantize_sample(double v, std::uint32_t max_value) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 1.0) return static_cast<std::uint16_t>(max_value);
  return static_cast<std::uint16_t>(std::floor(v * max_value + 0.5));
}

inline Image quantize(const FloatRaster& raster, int depth,
                      PixelDomain domain = PixelDomain::Natural8) {
  Image out(raster.width, raster.height, raster.channels, depth, domain);
  const std::uint32_t maxv = out.max_value();
  for (std::size_t i = 0; i < raster.values.size(); ++i)
    out.samples[i] = quantize_sample(raster.values[i], maxv);
  return out;
}

// Tight bounding box of the set pixels; width 0 when the mask is empty.
inline Rect bounding_box(const BinaryMask& m) {
  int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

// Crops with zero fill wherever the rectangle leaves the source.
inline FloatRaster crop(const FloatRaster& src, const Rect& r) {
  FloatRaster out(r.width, r.height, src.channels);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      const int sx = r.x + x, sy = r.y + y;
      if (sx < 0 || sy < 0 || sx >= src.width || sy >= src.height) continue;
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  return out;
}

inline Image crop(const Image& src, const Rect& r) {
  Image out(r.width, r.height, src.channels, src.depth, src.domain);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      const int sx = r.x + x, sy = r.y + y;
      if (sx < 0 || sy < 0 || sx >= src.width || sy >= src.height) continue;
      for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  return out;
}

inline BinaryMask crop(const BinaryMask& src, const Rect& r) {
  BinaryMask out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      if (src.in_bounds(r.x + x, r.y + y)) out.at(x, y) = src.at(r.x + x, r.y + y);
  return out;
}

}  // namespace lesionforge

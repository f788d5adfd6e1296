#pragma once

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lesionforge/image.hpp"

namespace lesionforge {

namespace png_detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct Decoded {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int depth = 0;
  std::vector<png_byte> bytes;
  std::vector<png_bytep> rows;
};

// Returns false on a libpng error. Only plain data lives across setjmp.
inline bool decode(std::FILE* fp, Decoded* out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  const bool gray = (color & PNG_COLOR_MASK_COLOR) == 0;
  if (!gray && bit_depth == 16) png_set_strip_16(png);
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->channels = png_get_channels(png, info);
  out->depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out->bytes.resize(rowbytes * out->height);
  out->rows.resize(out->height);
  for (png_uint_32 y = 0; y < out->height; ++y) out->rows[y] = out->bytes.data() + y * rowbytes;
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool encode(std::FILE* fp, png_uint_32 width, png_uint_32 height, int channels, int depth,
                   png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline FilePtr open(const std::filesystem::path& path, const char* mode) {
  FilePtr fp(std::fopen(path.string().c_str(), mode));
  if (!fp) throw std::runtime_error("cannot open " + path.string());
  return fp;
}

}  // namespace png_detail

// 16-bit grayscale files are read as HU-offset CT slices; everything else as
// 8-bit natural images. Alpha is dropped, 16-bit color is reduced to 8-bit.
inline Image read_png(const std::filesystem::path& path) {
  auto fp = png_detail::open(path, "rb");
  png_detail::Decoded d;
  if (!png_detail::decode(fp.get(), &d)) throw std::runtime_error("invalid PNG: " + path.string());
  if (d.channels == 2) d.channels = 1;  // gray+alpha survived stripping on old libpng
  const bool wide = d.depth == 16;
  Image img(static_cast<int>(d.width), static_cast<int>(d.height), d.channels, wide ? 16 : 8,
            wide ? PixelDomain::HUOffset16 : PixelDomain::Natural8);
  const std::size_t per_row = static_cast<std::size_t>(d.width) * d.channels;
  for (png_uint_32 y = 0; y < d.height; ++y) {
    const png_bytep row = d.rows[y];
    for (std::size_t i = 0; i < per_row; ++i) {
      img.samples[y * per_row + i] =
          wide ? static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]) : row[i];
    }
  }
  return img;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  img.validate();
  const bool wide = img.depth == 16;
  const std::size_t per_row = static_cast<std::size_t>(img.width) * img.channels;
  const std::size_t rowbytes = per_row * (wide ? 2 : 1);
  std::vector<png_byte> bytes(rowbytes * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = bytes.data() + y * rowbytes;
    for (std::size_t i = 0; i < per_row; ++i) {
      const std::uint16_t s = img.samples[y * per_row + i];
      if (wide) {
        rows[y][2 * i] = static_cast<png_byte>(s >> 8);
        rows[y][2 * i + 1] = static_cast<png_byte>(s & 0xFF);
      } else {
        rows[y][i] = static_cast<png_byte>(s);
      }
    }
  }
  auto fp = png_detail::open(path, "wb");
  if (!png_detail::encode(fp.get(), static_cast<png_uint_32>(img.width),
                          static_cast<png_uint_32>(img.height), img.channels, img.depth,
                          rows.data()))
    throw std::runtime_error("failed to write PNG: " + path.string());
}

// Any nonzero sample marks the pixel as set.
inline BinaryMask read_mask_png(const std::filesystem::path& path) {
  const Image img = read_png(path);
  BinaryMask m(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        if (img.at(x, y, c)) m.at(x, y) = 1;
  return m;
}

inline void write_mask_png(const std::filesystem::path& path, const BinaryMask& m) {
  Image img(m.width, m.height, 1, 8);
  for (std::size_t i = 0; i < m.bits.size(); ++i) img.samples[i] = m.bits[i] ? 255 : 0;
  write_png(path, img);
}

}  // namespace lesionforge

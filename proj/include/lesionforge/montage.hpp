#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lesionforge/dataset.hpp"
#include "lesionforge/image.hpp"
#include "lesionforge/png_io.hpp"
#include "lesionforge/preprocess.hpp"

namespace lesionforge {

struct Montage {
  Image image;  // 8-bit RGB
  int tiles = 0;
};

namespace montage_detail {

inline Image to_rgb8(const Image& img, int w, int h) {
  Image src = img;
  if (src.width != w || src.height != h || src.depth != 8) {
    FloatRaster f = to_float(src);
    if (src.width != w || src.height != h) f = resize_bilinear(f, w, h);
    src = quantize(f, 8);
  }
  Image out(w, h, 3, 8);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = src.at(x, y, src.channels == 3 ? c : 0);
  return out;
}

inline void outline(Image& img, int ox, int oy, int x0, int y0, int x1, int y1) {
  auto put = [&](int x, int y) {
    x = std::clamp(x, 0, img.width - 1 - ox);
    y = std::clamp(y, 0, img.height - 1);
    img.at(ox + x, oy + y, 0) = 255;
    img.at(ox + x, oy + y, 1) = 0;
    img.at(ox + x, oy + y, 2) = 0;
  };
  for (int x = x0; x <= x1; ++x) {
    put(x, y0);
    put(x, y1);
  }
  for (int y = y0; y <= y1; ++y) {
    put(x0, y);
    put(x1, y);
  }
}

}  // namespace montage_detail

// Grid of k rows: source normal on the left, synthetic sample on the right with
// every paste rectangle outlined in red. Tiles take the first sample's size.
inline Montage make_montage(const std::filesystem::path& dataset_dir, int k) {
  if (k <= 0) throw std::invalid_argument("montage needs k >= 1");
  const auto records = read_dataset_manifest(dataset_dir / kManifestFile);
  std::map<std::string, std::string> normal_of;
  std::vector<const ManifestRecord*> synthetic;
  for (const auto& r : records) {
    if (r.label == 0)
      normal_of[r.source] = r.path;
    else
      synthetic.push_back(&r);
  }
  if (synthetic.empty()) throw std::invalid_argument("dataset has no synthetic samples");
  const int rows = std::min<int>(k, static_cast<int>(synthetic.size()));

  const Image first = read_png(dataset_dir / synthetic.front()->path);
  const int tw = first.width, th = first.height;
  Montage m;
  m.image = Image(2 * tw, rows * th, 3, 8);
  for (int row = 0; row < rows; ++row) {
    const ManifestRecord& rec = *synthetic[row];
    const auto normal = normal_of.find(rec.source);
    if (normal == normal_of.end())
      throw std::invalid_argument("no normal image recorded for '" + rec.source + "'");
    const Image anomalous = read_png(dataset_dir / rec.path);
    const Image left = montage_detail::to_rgb8(read_png(dataset_dir / normal->second), tw, th);
    Image right = montage_detail::to_rgb8(anomalous, tw, th);
    const double sx = static_cast<double>(tw) / anomalous.width;
    const double sy = static_cast<double>(th) / anomalous.height;
    for (const auto& p : rec.paste_log) {
      montage_detail::outline(right, 0, 0, static_cast<int>(p.position.x * sx),
                              static_cast<int>(p.position.y * sy),
                              static_cast<int>((p.position.x + p.width - 1) * sx),
                              static_cast<int>((p.position.y + p.height - 1) * sy));
    }
    for (int y = 0; y < th; ++y)
      for (int x = 0; x < tw; ++x)
        for (int c = 0; c < 3; ++c) {
          m.image.at(x, row * th + y, c) = left.at(x, y, c);
          m.image.at(tw + x, row * th + y, c) = right.at(x, y, c);
        }
    m.tiles += 2;
  }
  return m;
}

}  // namespace lesionforge

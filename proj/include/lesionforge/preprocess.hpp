#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "lesionforge/ccl.hpp"
#include "lesionforge/image.hpp"

namespace lesionforge {

// Hounsfield window; maps [level - width/2, level + width/2] onto the gray range.
struct WindowSpec {
  double level = -300.0;
  double width = 1400.0;

  void validate() const {
    if (!(width > 0.0)) throw std::invalid_argument("window width must be positive");
  }
  double lower() const { return level - width / 2.0; }
  double upper() const { return level + width / 2.0; }

  static WindowSpec lung() { return {-300.0, 1400.0}; }
};

inline Image window_ct(const Image& img, const WindowSpec& w) {
  if (img.domain != PixelDomain::HUOffset16)
    throw std::invalid_argument("window_ct expects an HU-offset CT image");
  w.validate();
  Image out(img.width, img.height, 1, 8);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const double hu = static_cast<double>(img.samples[i]) - kHuOffset;
    out.samples[i] = quantize_sample((hu - w.lower()) / w.width, 255);
  }
  return out;
}

// Luminance in [0,1] per pixel (Rec. 601 weights for color).
inline FloatRaster luminance(const Image& img) {
  FloatRaster lum(img.width, img.height, 1);
  const double scale = 1.0 / img.max_value();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double v = img.at(x, y, 0);
      if (img.channels == 3)
        v = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      lum.at(x, y) = static_cast<float>(v * scale);
    }
  return lum;
}

struct FovOptions {
  double threshold = 10.0 / 255.0;  // luminance must exceed this
  double min_coverage = 0.10;       // below this fraction, fall back to the full frame
};

// Field-of-view mask: thresholded luminance, reduced to its largest
// 8-connected component. Never empty.
inline BinaryMask detect_fov(const Image& img, const FovOptions& opt = {}) {
  const FloatRaster lum = luminance(img);
  BinaryMask bright(img.width, img.height);
  for (std::size_t i = 0; i < lum.values.size(); ++i)
    bright.bits[i] = lum.values[i] > opt.threshold ? 1 : 0;

  const ComponentLabels labels = label_components(bright, Connectivity::Eight);
  if (labels.count == 0) return BinaryMask(img.width, img.height, 1);
  const auto areas = component_areas(labels);
  const auto largest = std::max_element(areas.begin() + 1, areas.end()) - areas.begin();
  if (static_cast<double>(areas[largest]) < opt.min_coverage * img.pixel_count())
    return BinaryMask(img.width, img.height, 1);
  return component_mask(labels, static_cast<std::int32_t>(largest));
}

// Square centered on the mask's bounding box, side = the longer box side.
// May extend past the frame; crop() pads with zeros.
inline Rect fov_square(const BinaryMask& fov) {
  const Rect box = bounding_box(fov);
  if (box.width == 0) return {0, 0, fov.width, fov.height};
  const int side = std::max(box.width, box.height);
  return {box.x - (side - box.width) / 2, box.y - (side - box.height) / 2, side, side};
}

// Bilinear resampling with pixel-center alignment, edge samples clamped.
inline FloatRaster resize_bilinear(const FloatRaster& src, int out_w, int out_h) {
  FloatRaster out(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(x0, y0, c) * (1.0 - tx) + src.at(x1, y0, c) * tx;
        const double bottom = src.at(x0, y1, c) * (1.0 - tx) + src.at(x1, y1, c) * tx;
        out.at(x, y, c) = static_cast<float>(top * (1.0 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

inline BinaryMask resize_nearest(const BinaryMask& src, int out_w, int out_h) {
  BinaryMask out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const int syi = std::min(static_cast<int>((y + 0.5) * src.height / out_h), src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      const int sxi = std::min(static_cast<int>((x + 0.5) * src.width / out_w), src.width - 1);
      out.at(x, y) = src.at(sxi, syi) ? 1 : 0;
    }
  }
  return out;
}

inline Image resize_canonical(const Image& img, int side = 256) {
  if (side <= 0) throw std::invalid_argument("resize side must be positive");
  if (img.width == side && img.height == side) return img;
  return quantize(resize_bilinear(to_float(img), side, side), img.depth, img.domain);
}

inline BinaryMask resize_canonical(const BinaryMask& m, int side = 256) {
  if (side <= 0) throw std::invalid_argument("resize side must be positive");
  if (m.width == side && m.height == side) return m;
  return resize_nearest(m, side, side);
}

struct PreprocessOptions {
  std::optional<WindowSpec> window;  // applied to HU-offset inputs
  bool fov_crop = false;
  FovOptions fov;
  int size = 256;  // 0 disables resizing
};

// Geometry chosen for one image, so annotation masks can follow it exactly.
struct PreprocessPlan {
  std::optional<Rect> crop;
  int size = 0;
};

inline PreprocessPlan plan_preprocess(const Image& windowed, const PreprocessOptions& opt) {
  PreprocessPlan plan;
  if (opt.fov_crop) plan.crop = fov_square(detect_fov(windowed, opt.fov));
  plan.size = opt.size;
  return plan;
}

inline Image apply_window(const Image& img, const PreprocessOptions& opt) {
  if (img.domain == PixelDomain::HUOffset16 && opt.window) return window_ct(img, *opt.window);
  return img;
}

inline Image apply_plan(const Image& img, const PreprocessPlan& plan) {
  Image out = plan.crop ? crop(img, *plan.crop) : img;
  return plan.size > 0 ? resize_canonical(out, plan.size) : out;
}

inline BinaryMask apply_plan(const BinaryMask& m, const PreprocessPlan& plan) {
  BinaryMask out = plan.crop ? crop(m, *plan.crop) : m;
  return plan.size > 0 ? resize_canonical(out, plan.size) : out;
}

inline Image preprocess(const Image& img, const PreprocessOptions& opt) {
  const Image windowed = apply_window(img, opt);
  return apply_plan(windowed, plan_preprocess(windowed, opt));
}

}  // namespace lesionforge

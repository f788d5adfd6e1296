#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lesionforge/image.hpp"
#include "lesionforge/patch.hpp"
#include "lesionforge/preprocess.hpp"
#include "lesionforge/rng.hpp"

namespace lesionforge {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct AugmentSpec {
  std::array<bool, 6> enabled{};  // indexed by AugmentOp
  double flip_probability = 0.5;  // per axis
  Range rotation_range{0.0, 360.0};
  Range scale_range{0.75, 1.25};
  Range contrast_range{0.8, 1.2};
  Range brightness_range{0.8, 1.2};
  Range hue_range{-18.0, 18.0};
  Range saturation_range{0.8, 1.2};

  bool is_enabled(AugmentOp op) const { return enabled[static_cast<std::size_t>(op)]; }
  AugmentSpec& enable(AugmentOp op, bool on = true) {
    enabled[static_cast<std::size_t>(op)] = on;
    return *this;
  }
  int enabled_count() const {
    return static_cast<int>(std::count(enabled.begin(), enabled.end(), true));
  }

  // Throws std::invalid_argument naming the offending field.
  void validate() const {
    auto check = [](const Range& r, const char* name) {
      if (!(r.lo <= r.hi)) throw std::invalid_argument(std::string(name) + ": lo > hi");
    };
    check(rotation_range, "rotation_range");
    check(scale_range, "scale_range");
    check(contrast_range, "contrast_range");
    check(brightness_range, "brightness_range");
    check(hue_range, "hue_range");
    check(saturation_range, "saturation_range");
    if (!(scale_range.lo > 0)) throw std::invalid_argument("scale_range: lo must be > 0");
    if (!(contrast_range.lo > 0)) throw std::invalid_argument("contrast_range: lo must be > 0");
    if (!(brightness_range.lo > 0))
      throw std::invalid_argument("brightness_range: lo must be > 0");
    if (!(saturation_range.lo >= 0))
      throw std::invalid_argument("saturation_range: lo must be >= 0");
    if (!(flip_probability >= 0 && flip_probability <= 1))
      throw std::invalid_argument("flip_probability must lie in [0, 1]");
  }

  friend bool operator==(const AugmentSpec&, const AugmentSpec&) = default;
};

inline AugmentSpec augment_spec_with(std::initializer_list<AugmentOp> ops) {
  AugmentSpec spec;
  for (AugmentOp op : ops) spec.enable(op);
  return spec;
}

// Named operation subsets, including every ablation row of the augmentation study.
inline const std::vector<std::pair<std::string, AugmentSpec>>& augment_presets() {
  using enum AugmentOp;
  static const std::vector<std::pair<std::string, AugmentSpec>> presets = {
      {"none", augment_spec_with({})},
      {"all", augment_spec_with({Flip, Rotation, Resize, Contrast, Brightness, ColorDistortion})},
      {"default", augment_spec_with({Flip, Rotation, Resize, Contrast, Brightness})},
      {"color", augment_spec_with({ColorDistortion})},
      {"flip", augment_spec_with({Flip})},
      {"contrast", augment_spec_with({Contrast})},
      {"rotation", augment_spec_with({Rotation})},
      {"resize", augment_spec_with({Resize})},
      {"brightness", augment_spec_with({Brightness})},
      {"resize+brightness", augment_spec_with({Resize, Brightness})},
      {"rotation+resize+brightness", augment_spec_with({Rotation, Resize, Brightness})},
      {"contrast+rotation+resize+brightness",
       augment_spec_with({Contrast, Rotation, Resize, Brightness})},
  };
  return presets;
}

inline std::optional<AugmentSpec> augment_preset(std::string_view name) {
  for (const auto& [n, spec] : augment_presets())
    if (n == name) return spec;
  return std::nullopt;
}

// ---- geometric ops ---------------------------------------------------------

enum class FlipAxis { Horizontal, Vertical };

inline LesionPatch flip(const LesionPatch& p, FlipAxis axis) {
  LesionPatch out = p;
  const int w = p.width(), h = p.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int sx = axis == FlipAxis::Horizontal ? w - 1 - x : x;
      const int sy = axis == FlipAxis::Vertical ? h - 1 - y : y;
      out.mask.at(x, y) = p.mask.at(sx, sy);
      for (int c = 0; c < p.pixels.channels; ++c) out.pixels.at(x, y, c) = p.pixels.at(sx, sy, c);
    }
  return out;
}

namespace augment_detail {

// Crops pixels and mask to the mask's tight box. Mask must be nonempty.
inline LesionPatch recrop(LesionPatch p) {
  const Rect box = bounding_box(p.mask);
  if (box == Rect{0, 0, p.mask.width, p.mask.height}) return p;
  p.pixels = crop(p.pixels, box);
  p.mask = crop(p.mask, box);
  return p;
}

// Exact rotation by quarter turns, counterclockwise as displayed.
inline LesionPatch rotate_quarter(const LesionPatch& p, int quarters) {
  const int w = p.width(), h = p.height();
  const bool swap = quarters % 2 == 1;
  LesionPatch out = p;
  out.pixels = FloatRaster(swap ? h : w, swap ? w : h, p.pixels.channels);
  out.mask = BinaryMask(swap ? h : w, swap ? w : h);
  for (int y = 0; y < out.mask.height; ++y)
    for (int x = 0; x < out.mask.width; ++x) {
      int sx = x, sy = y;
      switch (quarters) {
        case 1: sx = w - 1 - y; sy = x; break;
        case 2: sx = w - 1 - x; sy = h - 1 - y; break;
        case 3: sx = y; sy = h - 1 - x; break;
        default: break;
      }
      out.mask.at(x, y) = p.mask.at(sx, sy);
      for (int c = 0; c < p.pixels.channels; ++c) out.pixels.at(x, y, c) = p.pixels.at(sx, sy, c);
    }
  return out;
}

inline float sample_bilinear(const FloatRaster& r, double fx, double fy, int c) {
  fx = std::clamp(fx, 0.0, r.width - 1.0);
  fy = std::clamp(fy, 0.0, r.height - 1.0);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, r.width - 1), y1 = std::min(y0 + 1, r.height - 1);
  const double tx = fx - x0, ty = fy - y0;
  const double top = r.at(x0, y0, c) * (1 - tx) + r.at(x1, y0, c) * tx;
  const double bottom = r.at(x0, y1, c) * (1 - tx) + r.at(x1, y1, c) * tx;
  return static_cast<float>(top * (1 - ty) + bottom * ty);
}

}  // namespace augment_detail

// Counterclockwise rotation (as displayed) about the patch center. The canvas
// grows to hold the rotated footprint and the result is re-cropped to the
// mask's tight box. Quarter turns are exact pixel permutations.
//
// The mask is resampled as bilinear coverage and the lesion keeps the
// area() pixels of highest coverage (ties in raster order). Plain
// thresholding drifts by several percent per turn on lesions a few pixels
// across; ranking keeps the area exact and the shape essentially unchanged.
inline LesionPatch rotate(const LesionPatch& p, double degrees) {
  double a = std::fmod(degrees, 360.0);
  if (a < 0) a += 360.0;
  constexpr double kEps = 1e-9;
  for (int q = 0; q <= 4; ++q)
    if (std::abs(a - 90.0 * q) < kEps)
      return q % 4 == 0 ? p : augment_detail::rotate_quarter(p, q);

  const double theta = a * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const int w = p.width(), h = p.height();
  const int out_w = std::max(1, static_cast<int>(std::ceil(std::abs(w * cs) + std::abs(h * sn) - kEps)));
  const int out_h = std::max(1, static_cast<int>(std::ceil(std::abs(w * sn) + std::abs(h * cs) - kEps)));

  LesionPatch out = p;
  out.pixels = FloatRaster(out_w, out_h, p.pixels.channels);
  out.mask = BinaryMask(out_w, out_h);
  auto mask_at = [&](int x, int y) { return p.mask.in_bounds(x, y) ? double(p.mask.at(x, y)) : 0.0; };
  std::vector<double> coverage(static_cast<std::size_t>(out_w) * out_h, 0.0);
  std::vector<std::size_t> candidates;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const double dx = x + 0.5 - out_w / 2.0, dy = y + 0.5 - out_h / 2.0;
      const double sx = w / 2.0 + cs * dx - sn * dy - 0.5;
      const double sy = h / 2.0 + sn * dx + cs * dy - 0.5;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      const double tx = sx - x0, ty = sy - y0;
      const double v = (mask_at(x0, y0) * (1 - tx) + mask_at(x0 + 1, y0) * tx) * (1 - ty) +
                       (mask_at(x0, y0 + 1) * (1 - tx) + mask_at(x0 + 1, y0 + 1) * tx) * ty;
      const std::size_t i = static_cast<std::size_t>(y) * out_w + x;
      coverage[i] = v;
      if (v > 0) candidates.push_back(i);
      for (int c = 0; c < p.pixels.channels; ++c)
        out.pixels.at(x, y, c) = augment_detail::sample_bilinear(p.pixels, sx, sy, c);
    }
  const std::size_t keep = std::min(p.mask.area(), candidates.size());
  if (keep == 0) return p;  // nothing landed on a pixel center; keep the original
  auto higher = [&](std::size_t a, std::size_t b) {
    return coverage[a] != coverage[b] ? coverage[a] > coverage[b] : a < b;
  };
  std::nth_element(candidates.begin(), candidates.begin() + (keep - 1), candidates.end(), higher);
  for (std::size_t k = 0; k < keep; ++k) out.mask.bits[candidates[k]] = 1;
  return augment_detail::recrop(std::move(out));
}

// Scales both axes by `scale` (round to nearest, at least 1 pixel).
inline LesionPatch resize_patch(const LesionPatch& p, double scale) {
  if (!(scale > 0)) throw std::invalid_argument("resize scale must be positive");
  if (scale == 1.0) return p;
  const int w = std::max(1, static_cast<int>(std::floor(p.width() * scale + 0.5)));
  const int h = std::max(1, static_cast<int>(std::floor(p.height() * scale + 0.5)));
  if (w == p.width() && h == p.height()) return p;
  LesionPatch out = p;
  out.pixels = resize_bilinear(p.pixels, w, h);
  out.mask = resize_nearest(p.mask, w, h);
  if (out.mask.empty()) {
    // Downscaling skipped every set pixel; keep the one nearest the first lesion pixel.
    const Rect box = bounding_box(p.mask);
    const int x = std::min(w - 1, static_cast<int>(box.x * static_cast<double>(w) / p.width()));
    const int y = std::min(h - 1, static_cast<int>(box.y * static_cast<double>(h) / p.height()));
    out.mask.at(x, y) = 1;
  }
  return augment_detail::recrop(std::move(out));
}

// ---- photometric ops -------------------------------------------------------

inline LesionPatch adjust_brightness(const LesionPatch& p, double factor) {
  LesionPatch out = p;
  if (factor == 1.0) return out;
  for (auto& v : out.pixels.values) v = static_cast<float>(std::clamp(v * factor, 0.0, 1.0));
  return out;
}

// Pivots on the per-channel mean over lesion (mask-set) pixels.
inline LesionPatch adjust_contrast(const LesionPatch& p, double factor) {
  LesionPatch out = p;
  if (factor == 1.0) return out;
  const int ch = p.pixels.channels;
  std::vector<double> mean(ch, 0.0);
  std::size_t n = 0;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      if (!p.mask.at(x, y)) continue;
      ++n;
      for (int c = 0; c < ch; ++c) mean[c] += p.pixels.at(x, y, c);
    }
  if (n == 0) return out;
  for (auto& m : mean) m /= static_cast<double>(n);
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x)
      for (int c = 0; c < ch; ++c) {
        const double v = mean[c] + (p.pixels.at(x, y, c) - mean[c]) * factor;
        out.pixels.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
  return out;
}

struct Hsv {
  double h;  // degrees in [0, 360)
  double s;
  double v;
};

inline Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0) {
    if (mx == r)
      h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      h = 60.0 * ((b - r) / d + 2.0);
    else
      h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0) h += 360.0;
  return {h, mx > 0 ? d / mx : 0.0, mx};
}

inline std::array<double, 3> hsv_to_rgb(const Hsv& hsv) {
  double h = std::fmod(hsv.h, 360.0);
  if (h < 0) h += 360.0;
  const double c = hsv.v * hsv.s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = hsv.v - c;
  return {r + m, g + m, b + m};
}

// Hue rotation and saturation scaling in HSV; V is left untouched.
inline LesionPatch color_distort(const LesionPatch& p, double hue_shift, double sat_factor) {
  if (p.pixels.channels != 3) throw std::invalid_argument("color distortion needs an RGB patch");
  LesionPatch out = p;
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) {
      Hsv hsv = rgb_to_hsv(p.pixels.at(x, y, 0), p.pixels.at(x, y, 1), p.pixels.at(x, y, 2));
      hsv.h += hue_shift;
      hsv.s = std::clamp(hsv.s * sat_factor, 0.0, 1.0);
      const auto rgb = hsv_to_rgb(hsv);
      for (int c = 0; c < 3; ++c)
        out.pixels.at(x, y, c) = static_cast<float>(std::clamp(rgb[c], 0.0, 1.0));
    }
  return out;
}

// ---- composition -----------------------------------------------------------

inline LesionPatch apply_step(const LesionPatch& p, const AugmentStep& step) {
  if (step.skipped) return p;
  switch (step.op) {
    case AugmentOp::Flip: {
      LesionPatch out = p;
      if (step.params[0] != 0) out = flip(out, FlipAxis::Horizontal);
      if (step.params[1] != 0) out = flip(out, FlipAxis::Vertical);
      return out;
    }
    case AugmentOp::Rotation: return rotate(p, step.params[0]);
    case AugmentOp::Resize: return resize_patch(p, step.params[0]);
    case AugmentOp::Contrast: return adjust_contrast(p, step.params[0]);
    case AugmentOp::Brightness: return adjust_brightness(p, step.params[0]);
    case AugmentOp::ColorDistortion: return color_distort(p, step.params[0], step.params[1]);
  }
  return p;
}

// Draws parameters for every enabled op (fixed order) and applies them.
// Appends one log entry per enabled op.
inline LesionPatch apply_random(const LesionPatch& p, const AugmentSpec& spec, RngStream& rng) {
  LesionPatch out = p;
  for (AugmentOp op : kAugmentOrder) {
    if (!spec.is_enabled(op)) continue;
    AugmentStep step;
    step.op = op;
    switch (op) {
      case AugmentOp::Flip:
        step.params = {rng.bernoulli(spec.flip_probability) ? 1.0 : 0.0,
                       rng.bernoulli(spec.flip_probability) ? 1.0 : 0.0};
        break;
      case AugmentOp::Rotation:
        step.params[0] = rng.uniform(spec.rotation_range.lo, spec.rotation_range.hi);
        break;
      case AugmentOp::Resize:
        step.params[0] = rng.uniform(spec.scale_range.lo, spec.scale_range.hi);
        break;
      case AugmentOp::Contrast:
        step.params[0] = rng.uniform(spec.contrast_range.lo, spec.contrast_range.hi);
        break;
      case AugmentOp::Brightness:
        step.params[0] = rng.uniform(spec.brightness_range.lo, spec.brightness_range.hi);
        break;
      case AugmentOp::ColorDistortion:
        step.params = {rng.uniform(spec.hue_range.lo, spec.hue_range.hi),
                       rng.uniform(spec.saturation_range.lo, spec.saturation_range.hi)};
        step.skipped = out.pixels.channels != 3;
        break;
    }
    out = apply_step(out, step);
    out.augmentation_log.push_back(step);
  }
  return out;
}

// Re-applies a recorded log to an unaugmented patch.
inline LesionPatch replay_augmentations(const LesionPatch& original,
                                        const std::vector<AugmentStep>& log) {
  LesionPatch out = original;
  for (const auto& step : log) {
    out = apply_step(out, step);
    out.augmentation_log.push_back(step);
  }
  return out;
}

}  // namespace lesionforge

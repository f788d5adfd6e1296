#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lesionforge/image.hpp"

namespace lesionforge {

enum class LesionType : std::uint8_t { MA, HE, SE, EX, COVID, OTHER };

inline constexpr std::array<LesionType, 6> kAllLesionTypes = {
    LesionType::MA, LesionType::HE, LesionType::SE, LesionType::EX, LesionType::COVID,
    LesionType::OTHER};

inline std::string_view to_string(LesionType t) {
  switch (t) {
    case LesionType::MA: return "MA";
    case LesionType::HE: return "HE";
    case LesionType::SE: return "SE";
    case LesionType::EX: return "EX";
    case LesionType::COVID: return "COVID";
    case LesionType::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<LesionType> parse_lesion_type(std::string_view s) {
  for (LesionType t : kAllLesionTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

// Bitset over LesionType.
class LesionTypeSet {
 public:
  LesionTypeSet() = default;
  LesionTypeSet(std::initializer_list<LesionType> types) {
    for (LesionType t : types) insert(t);
  }
  static LesionTypeSet all() {
    LesionTypeSet s;
    for (LesionType t : kAllLesionTypes) s.insert(t);
    return s;
  }

  void insert(LesionType t) { bits_ |= bit(t); }
  bool contains(LesionType t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }

  std::vector<LesionType> members() const {
    std::vector<LesionType> out;
    for (LesionType t : kAllLesionTypes)
      if (contains(t)) out.push_back(t);
    return out;
  }

  friend bool operator==(const LesionTypeSet&, const LesionTypeSet&) = default;

 private:
  static std::uint8_t bit(LesionType t) { return static_cast<std::uint8_t>(1u << static_cast<int>(t)); }
  std::uint8_t bits_ = 0;
};

enum class AugmentOp : std::uint8_t { Flip, Rotation, Resize, Contrast, Brightness, ColorDistortion };

inline constexpr std::array<AugmentOp, 6> kAugmentOrder = {
    AugmentOp::Flip,     AugmentOp::Rotation,   AugmentOp::Resize,
    AugmentOp::Contrast, AugmentOp::Brightness, AugmentOp::ColorDistortion};

inline std::string_view to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::Flip: return "flip";
    case AugmentOp::Rotation: return "rotation";
    case AugmentOp::Resize: return "resize";
    case AugmentOp::Contrast: return "contrast";
    case AugmentOp::Brightness: return "brightness";
    case AugmentOp::ColorDistortion: return "color";
  }
  return "flip";
}

inline std::optional<AugmentOp> parse_augment_op(std::string_view s) {
  for (AugmentOp op : kAugmentOrder)
    if (to_string(op) == s) return op;
  return std::nullopt;
}

// One applied transform and its drawn parameters.
//   Flip:            {horizontal 0/1, vertical 0/1}
//   Rotation:        {degrees}
//   Resize:          {scale}
//   Contrast:        {factor}
//   Brightness:      {factor}
//   ColorDistortion: {hue shift degrees, saturation factor}; skipped on gray patches
struct AugmentStep {
  AugmentOp op = AugmentOp::Flip;
  std::array<double, 2> params{0.0, 0.0};
  bool skipped = false;

  friend bool operator==(const AugmentStep&, const AugmentStep&) = default;
};

struct LesionPatch {
  FloatRaster pixels;
  BinaryMask mask;
  LesionType lesion_type = LesionType::OTHER;
  std::string source_id;
  int component_id = 0;
  std::vector<AugmentStep> augmentation_log;

  int width() const { return mask.width; }
  int height() const { return mask.height; }

  // Nonempty mask, matching dimensions, tight bounding box.
  void validate() const {
    if (pixels.width != mask.width || pixels.height != mask.height)
      throw std::invalid_argument("patch pixels and mask differ in size");
    if (!mask.is_binary()) throw std::invalid_argument("patch mask is not binary");
    const Rect box = bounding_box(mask);
    if (box.width == 0) throw std::invalid_argument("patch mask is empty");
    if (box != Rect{0, 0, mask.width, mask.height})
      throw std::invalid_argument("patch is not cropped to its tight bounding box");
  }

  friend bool operator==(const LesionPatch&, const LesionPatch&) = default;
};

}  // namespace lesionforge

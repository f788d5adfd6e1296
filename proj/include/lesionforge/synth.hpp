#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lesionforge/augment.hpp"
#include "lesionforge/image.hpp"
#include "lesionforge/lesion_bank.hpp"
#include "lesionforge/patch.hpp"
#include "lesionforge/rng.hpp"

namespace lesionforge {

struct MixUpMode {
  enum class Kind { Random, Fixed, HardPaste };

  Kind kind = Kind::Random;
  double lo = 0.5;      // Random
  double hi = 0.8;      // Random
  double lambda = 1.0;  // Fixed

  static MixUpMode random(double lo = 0.5, double hi = 0.8) { return {Kind::Random, lo, hi, 1.0}; }
  static MixUpMode fixed(double lambda) { return {Kind::Fixed, 0.5, 0.8, lambda}; }
  static MixUpMode hard_paste() { return {Kind::HardPaste, 0.5, 0.8, 1.0}; }

  void validate() const {
    if (kind == Kind::Random) {
      if (!(lo >= 0.0 && hi <= 1.0)) throw std::invalid_argument("mixup: range must lie in [0, 1]");
      if (!(lo <= hi)) throw std::invalid_argument("mixup: lo > hi");
    } else if (kind == Kind::Fixed && !(lambda >= 0.0 && lambda <= 1.0)) {
      throw std::invalid_argument("mixup: lambda must lie in [0, 1]");
    }
  }

  // Blend weight of the lesion, already rounded to the float used for compositing.
  float draw(RngStream& rng) const {
    switch (kind) {
      case Kind::Random: return static_cast<float>(rng.uniform(lo, hi));
      case Kind::Fixed: return static_cast<float>(lambda);
      case Kind::HardPaste: return 1.0f;
    }
    return 1.0f;
  }

  friend bool operator==(const MixUpMode&, const MixUpMode&) = default;
};

// Named blend settings of the MixUp coefficient study.
inline std::optional<MixUpMode> mixup_preset(std::string_view name) {
  if (name == "random") return MixUpMode::random();
  if (name == "none" || name == "hard") return MixUpMode::hard_paste();
  if (name == "0.5") return MixUpMode::fixed(0.5);
  if (name == "0.7") return MixUpMode::fixed(0.7);
  if (name == "0.8") return MixUpMode::fixed(0.8);
  return std::nullopt;
}

struct CompositionRule {
  double probability = 1.0;
  LesionTypeSet types;

  friend bool operator==(const CompositionRule&, const CompositionRule&) = default;
};

struct CompositionStrategy {
  std::vector<CompositionRule> rules;

  void validate() const {
    if (rules.empty()) throw std::invalid_argument("composition: no rules");
    double sum = 0.0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto& r = rules[i];
      if (!(r.probability >= 0.0))
        throw std::invalid_argument("composition[" + std::to_string(i) + "].probability is negative");
      if (r.types.empty())
        throw std::invalid_argument("composition[" + std::to_string(i) + "].types is empty");
      sum += r.probability;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("composition: probabilities sum to " + std::to_string(sum) +
                                  ", expected 1");
  }

  std::size_t draw(RngStream& rng) const {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      acc += rules[i].probability;
      if (u < acc) return i;
    }
    return rules.size() - 1;
  }

  // Every pasted lesion may be of any type.
  static CompositionStrategy any() { return {{{1.0, LesionTypeSet::all()}}}; }

  // Grade-conditioned diabetic retinopathy mix: grade 1 shows MA only, grade 2
  // adds HE, more severe grades add SE and then EX.
  static CompositionStrategy dr_grades() {
    using enum LesionType;
    return {{{0.80, {MA}}, {0.10, {MA, HE}}, {0.05, {MA, HE, SE}}, {0.05, {MA, HE, SE, EX}}}};
  }

  friend bool operator==(const CompositionStrategy&, const CompositionStrategy&) = default;
};

inline std::optional<CompositionStrategy> composition_preset(std::string_view name) {
  if (name == "any") return CompositionStrategy::any();
  if (name == "dr-grades") return CompositionStrategy::dr_grades();
  return std::nullopt;
}

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Blends the patch in at `pos`:
//   out = (1 - lambda) * base + lambda * patch   where mask = 1
//   out = base                                   elsewhere
// A single-channel patch is broadcast over an RGB base.
inline void mixup_paste_into(FloatRaster& base, const LesionPatch& patch, Point pos, float lambda) {
  if (pos.x < 0 || pos.y < 0 || pos.x + patch.width() > base.width ||
      pos.y + patch.height() > base.height)
    throw std::out_of_range("patch placement leaves the image");
  const int pc = patch.pixels.channels;
  if (pc != base.channels && pc != 1)
    throw std::invalid_argument("cannot paste an RGB patch onto a grayscale image");
  const float keep = 1.0f - lambda;
  for (int y = 0; y < patch.height(); ++y)
    for (int x = 0; x < patch.width(); ++x) {
      if (!patch.mask.at(x, y)) continue;
      for (int c = 0; c < base.channels; ++c) {
        float& b = base.at(pos.x + x, pos.y + y, c);
        b = keep * b + lambda * patch.pixels.at(x, y, pc == 1 ? 0 : c);
      }
    }
}

inline FloatRaster mixup_paste(const FloatRaster& base, const LesionPatch& patch, Point pos,
                               float lambda) {
  FloatRaster out = base;
  mixup_paste_into(out, patch, pos, lambda);
  return out;
}

inline constexpr int kPlacementAttempts = 100;

// Uniform top-left corner keeping the patch inside the base. With a placement
// mask, redraws until the patch center lies on it; after kPlacementAttempts
// misses the last unconstrained draw is used.
inline Point choose_position(int base_w, int base_h, int patch_w, int patch_h,
                             const BinaryMask* placement, RngStream& rng) {
  if (patch_w > base_w || patch_h > base_h)
    throw std::invalid_argument("patch " + std::to_string(patch_w) + "x" + std::to_string(patch_h) +
                                " does not fit in " + std::to_string(base_w) + "x" +
                                std::to_string(base_h));
  auto draw = [&] {
    const int x = static_cast<int>(rng.uniform_int(0, base_w - patch_w));
    const int y = static_cast<int>(rng.uniform_int(0, base_h - patch_h));
    return Point{x, y};
  };
  if (placement == nullptr) return draw();
  if (placement->width != base_w || placement->height != base_h)
    throw std::invalid_argument("placement mask does not match the base image");
  Point p{};
  for (int i = 0; i < kPlacementAttempts; ++i) {
    p = draw();
    if (placement->at(p.x + patch_w / 2, p.y + patch_h / 2)) return p;
  }
  return p;
}

struct PasteRecord {
  LesionType lesion_type = LesionType::OTHER;
  std::string source_id;
  int component_id = 0;
  Point position;
  int width = 0;
  int height = 0;
  float lambda = 1.0f;
  std::vector<AugmentStep> augmentation_log;

  friend bool operator==(const PasteRecord&, const PasteRecord&) = default;
};

struct SyntheticSample {
  FloatRaster image;
  int depth = 8;
  PixelDomain domain = PixelDomain::Natural8;
  std::vector<PasteRecord> paste_log;
  int label = 1;
  std::string source_normal_id;
  std::size_t rule_index = 0;

  Image to_image() const { return quantize(image, depth, domain); }
};

struct SynthesisRecipe {
  AugmentSpec augment;
  MixUpMode mixup = MixUpMode::random();
  CompositionStrategy composition = CompositionStrategy::any();
};

// Draws a composition rule, a paste count from the rule's component
// population, the patches, their augmentations, positions and blend weights,
// then composites sequentially (later pastes over earlier ones). Each kind of
// decision uses its own derived stream.
inline SyntheticSample synthesize_one(const Image& normal, const std::string& normal_id,
                                      const LesionBank& bank, const SynthesisRecipe& recipe,
                                      const BinaryMask* placement, const RngStream& rng) {
  if (bank.patches.empty()) throw std::invalid_argument("lesion bank is empty");
  SyntheticSample sample;
  sample.image = to_float(normal);
  sample.depth = normal.depth;
  sample.domain = normal.domain;
  sample.source_normal_id = normal_id;

  RngStream rule_rng = rng.derive("rule");
  sample.rule_index = recipe.composition.draw(rule_rng);
  const LesionTypeSet& types = recipe.composition.rules[sample.rule_index].types;

  const int components = bank.component_count(types);
  if (components == 0) throw std::invalid_argument("no lesion patches match the drawn composition rule");
  RngStream count_rng = rng.derive("count");
  const int n = sample_paste_count(components, count_rng);
  RngStream resample_rng = rng.derive("resample");
  const std::vector<LesionPatch> drawn = resample_patches(bank, n, types, resample_rng);

  const RngStream aug_root = rng.derive("augment");
  const RngStream pos_root = rng.derive("position");
  const RngStream lambda_root = rng.derive("lambda");
  for (std::size_t i = 0; i < drawn.size(); ++i) {
    RngStream aug_rng = aug_root.derive(i);
    const LesionPatch patch = apply_random(drawn[i], recipe.augment, aug_rng);
    RngStream pos_rng = pos_root.derive(i);
    const Point pos = choose_position(sample.image.width, sample.image.height, patch.width(),
                                      patch.height(), placement, pos_rng);
    RngStream lambda_rng = lambda_root.derive(i);
    const float lambda = recipe.mixup.draw(lambda_rng);
    mixup_paste_into(sample.image, patch, pos, lambda);
    sample.paste_log.push_back({patch.lesion_type, patch.source_id, patch.component_id, pos,
                                patch.width(), patch.height(), lambda, patch.augmentation_log});
  }
  return sample;
}

}  // namespace lesionforge

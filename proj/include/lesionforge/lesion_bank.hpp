#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lesionforge/ccl.hpp"
#include "lesionforge/image.hpp"
#include "lesionforge/patch.hpp"
#include "lesionforge/png_io.hpp"
#include "lesionforge/rng.hpp"

namespace lesionforge {

struct LesionBank {
  std::vector<LesionPatch> patches;
  int n_l = 0;     // isolated lesion regions in the source annotation
  int depth = 8;   // sample depth used when the bank is written out

  // Patches whose type is in `filter`, in bank order.
  std::vector<const LesionPatch*> filtered(const LesionTypeSet& filter) const {
    std::vector<const LesionPatch*> out;
    for (const auto& p : patches)
      if (filter.contains(p.lesion_type)) out.push_back(&p);
    return out;
  }

  // Distinct (source_id, component_id) among patches of the filtered types.
  int component_count(const LesionTypeSet& filter) const {
    std::set<std::pair<std::string, int>> ids;
    for (const auto& p : patches)
      if (filter.contains(p.lesion_type)) ids.emplace(p.source_id, p.component_id);
    return static_cast<int>(ids.size());
  }

  LesionTypeSet types() const {
    LesionTypeSet s;
    for (const auto& p : patches) s.insert(p.lesion_type);
    return s;
  }

  void validate() const {
    if (patches.empty()) throw std::invalid_argument("lesion bank is empty");
    if (n_l < 1) throw std::invalid_argument("lesion bank n_l must be at least 1");
    std::set<std::pair<std::string, int>> originals;
    for (const auto& p : patches) {
      p.validate();
      if (p.augmentation_log.empty()) originals.emplace(p.source_id, p.component_id);
    }
    if (static_cast<int>(originals.size()) != n_l)
      throw std::invalid_argument("lesion bank n_l does not match its unaugmented components");
  }
};

struct TypedMask {
  LesionType type;
  BinaryMask mask;
};

// One patch per connected component of every type mask. Component ids are
// unique across the whole annotation, numbered in mask order.
inline LesionBank extract_patches(const Image& img, const std::vector<TypedMask>& annotation,
                                  const std::string& source_id,
                                  Connectivity conn = Connectivity::Eight) {
  const FloatRaster pixels = to_float(img);
  LesionBank bank;
  bank.depth = img.depth;
  int next_id = 0;
  for (const auto& [type, mask] : annotation) {
    if (mask.width != img.width || mask.height != img.height)
      throw std::invalid_argument("annotation mask for " + std::string(to_string(type)) +
                                  " does not match the image size");
    const ComponentLabels labels = label_components(mask, conn);
    // Bounding boxes in one sweep.
    std::vector<Rect> boxes(labels.count + 1, Rect{img.width, img.height, -1, -1});
    for (int y = 0; y < labels.height; ++y)
      for (int x = 0; x < labels.width; ++x) {
        const auto l = labels.at(x, y);
        if (l == 0) continue;
        Rect& b = boxes[l];
        b.x = std::min(b.x, x);
        b.y = std::min(b.y, y);
        b.width = std::max(b.width, x);   // holds x1 until fixed up below
        b.height = std::max(b.height, y);  // holds y1
      }
    for (int l = 1; l <= labels.count; ++l) {
      Rect box = boxes[l];
      box.width = box.width - box.x + 1;
      box.height = box.height - box.y + 1;
      LesionPatch patch;
      patch.pixels = crop(pixels, box);
      patch.mask = BinaryMask(box.width, box.height);
      for (int y = 0; y < box.height; ++y)
        for (int x = 0; x < box.width; ++x)
          patch.mask.at(x, y) = labels.at(box.x + x, box.y + y) == l ? 1 : 0;
      patch.lesion_type = type;
      patch.source_id = source_id;
      patch.component_id = ++next_id;
      bank.patches.push_back(std::move(patch));
    }
  }
  if (bank.patches.empty()) throw std::invalid_argument("annotation contains no lesion pixels");
  bank.n_l = next_id;
  return bank;
}

inline int max_paste_count(int n_l) {
  return std::max(1, static_cast<int>(std::floor(1.5 * n_l + 0.5)));
}

// N ~ uniform over {1, ..., round(1.5 * n_l)}.
inline int sample_paste_count(int n_l, RngStream& rng) {
  if (n_l < 1) throw std::invalid_argument("sample_paste_count needs n_l >= 1");
  return static_cast<int>(rng.uniform_int(1, max_paste_count(n_l)));
}

// n uniform draws with replacement from the patches matching `filter`.
inline std::vector<LesionPatch> resample_patches(const LesionBank& bank, int n,
                                                 const LesionTypeSet& filter, RngStream& rng) {
  const auto pool = bank.filtered(filter);
  if (pool.empty()) throw std::invalid_argument("no lesion patches match the requested types");
  std::vector<LesionPatch> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) out.push_back(*pool[rng.below(pool.size())]);
  return out;
}

// ---- persistence -----------------------------------------------------------

inline nlohmann::json augment_log_to_json(const std::vector<AugmentStep>& log) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : log) {
    nlohmann::json j{{"op", std::string(to_string(s.op))}, {"params", {s.params[0], s.params[1]}}};
    if (s.skipped) j["skipped"] = true;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<AugmentStep> augment_log_from_json(const nlohmann::json& arr) {
  std::vector<AugmentStep> log;
  for (const auto& j : arr) {
    AugmentStep s;
    const auto op = parse_augment_op(j.at("op").get<std::string>());
    if (!op) throw std::invalid_argument("unknown augmentation op in log");
    s.op = *op;
    s.params = {j.at("params").at(0).get<double>(), j.at("params").at(1).get<double>()};
    s.skipped = j.value("skipped", false);
    log.push_back(s);
  }
  return log;
}

inline std::string patch_file_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "patch_%04zu", index);
  return buf;
}

// Writes patch_####.png, patch_####_mask.png and bank.json into `dir`.
inline void save_bank(const LesionBank& bank, const std::filesystem::path& dir) {
  bank.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["n_l"] = bank.n_l;
  manifest["depth"] = bank.depth;
  manifest["patches"] = nlohmann::json::array();
  for (std::size_t i = 0; i < bank.patches.size(); ++i) {
    const auto& p = bank.patches[i];
    const std::string stem = patch_file_stem(i);
    write_png(dir / (stem + ".png"), quantize(p.pixels, bank.depth));
    write_mask_png(dir / (stem + "_mask.png"), p.mask);
    manifest["patches"].push_back({{"image", stem + ".png"},
                                   {"mask", stem + "_mask.png"},
                                   {"lesion_type", std::string(to_string(p.lesion_type))},
                                   {"source_id", p.source_id},
                                   {"component_id", p.component_id},
                                   {"augmentation_log", augment_log_to_json(p.augmentation_log)}});
  }
  std::ofstream out(dir / "bank.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write " + (dir / "bank.json").string());
}

inline LesionBank load_bank(const std::filesystem::path& dir) {
  std::ifstream in(dir / "bank.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "bank.json").string());
  const nlohmann::json manifest = nlohmann::json::parse(in);
  LesionBank bank;
  bank.n_l = manifest.at("n_l").get<int>();
  bank.depth = manifest.value("depth", 8);
  for (const auto& j : manifest.at("patches")) {
    LesionPatch p;
    Image img = read_png(dir / j.at("image").get<std::string>());
    img.domain = PixelDomain::Natural8;  // patches are never windowed again
    p.pixels = to_float(img);
    p.mask = read_mask_png(dir / j.at("mask").get<std::string>());
    const auto type = parse_lesion_type(j.at("lesion_type").get<std::string>());
    if (!type) throw std::invalid_argument("unknown lesion type in bank.json");
    p.lesion_type = *type;
    p.source_id = j.at("source_id").get<std::string>();
    p.component_id = j.at("component_id").get<int>();
    p.augmentation_log = augment_log_from_json(j.value("augmentation_log", nlohmann::json::array()));
    bank.patches.push_back(std::move(p));
  }
  bank.validate();
  return bank;
}

}  // namespace lesionforge

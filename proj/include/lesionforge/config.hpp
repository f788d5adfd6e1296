#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lesionforge/augment.hpp"
#include "lesionforge/ccl.hpp"
#include "lesionforge/preprocess.hpp"
#include "lesionforge/synth.hpp"

namespace lesionforge {

enum class PlacementMode { Uniform, Fov };

// Everything that determines a synthesis run. Paths are supplied on the command line.
struct RunConfig {
  std::uint64_t seed = 0;
  PreprocessOptions preprocess;
  AugmentSpec augment = *augment_preset("default");
  MixUpMode mixup = MixUpMode::random();
  CompositionStrategy composition = CompositionStrategy::any();
  PlacementMode placement = PlacementMode::Uniform;
  Connectivity connectivity = Connectivity::Eight;

  SynthesisRecipe recipe() const { return {augment, mixup, composition}; }
};

struct ConfigResult {
  std::optional<RunConfig> config;
  std::vector<std::string> diagnostics;  // "field.path: message"

  bool ok() const { return config.has_value(); }
};

namespace config_detail {

using nlohmann::json;

struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw FieldError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw FieldError(where + "." + key + ": unknown key");
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw FieldError(where + ": expected a number");
  return j.get<double>();
}

inline Range range(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw FieldError(where + ": expected [lo, hi]");
  Range r{number(j[0], where + "[0]"), number(j[1], where + "[1]")};
  if (!(r.lo <= r.hi)) throw FieldError(where + ": lo > hi");
  return r;
}

inline PreprocessOptions parse_preprocess(const json& j) {
  reject_unknown(j, "preprocess", {"window", "fov_crop", "fov_threshold", "size"});
  PreprocessOptions opt;
  if (j.contains("window") && !j["window"].is_null()) {
    const json& w = j["window"];
    reject_unknown(w, "preprocess.window", {"level", "width"});
    if (!w.contains("level") || !w.contains("width"))
      throw FieldError("preprocess.window: needs level and width");
    opt.window = WindowSpec{number(w["level"], "preprocess.window.level"),
                            number(w["width"], "preprocess.window.width")};
    if (!(opt.window->width > 0)) throw FieldError("preprocess.window.width: must be > 0");
  }
  if (j.contains("fov_crop")) {
    if (!j["fov_crop"].is_boolean()) throw FieldError("preprocess.fov_crop: expected true/false");
    opt.fov_crop = j["fov_crop"].get<bool>();
  }
  if (j.contains("fov_threshold")) {
    opt.fov.threshold = number(j["fov_threshold"], "preprocess.fov_threshold");
    if (!(opt.fov.threshold >= 0 && opt.fov.threshold < 1))
      throw FieldError("preprocess.fov_threshold: must lie in [0, 1)");
  }
  if (j.contains("size")) {
    if (!j["size"].is_number_integer() || j["size"].get<int>() < 0)
      throw FieldError("preprocess.size: expected a non-negative integer");
    opt.size = j["size"].get<int>();
  }
  return opt;
}

inline AugmentSpec parse_augment(const json& j) {
  if (j.is_string()) {
    const auto preset = augment_preset(j.get<std::string>());
    if (!preset) throw FieldError("augment: unknown preset '" + j.get<std::string>() + "'");
    return *preset;
  }
  reject_unknown(j, "augment",
                 {"ops", "flip_probability", "rotation_range", "scale_range", "contrast_range",
                  "brightness_range", "hue_range", "saturation_range"});
  AugmentSpec spec;
  if (!j.contains("ops") || !j["ops"].is_array()) throw FieldError("augment.ops: expected a list");
  for (const auto& op : j["ops"]) {
    const auto parsed = op.is_string() ? parse_augment_op(op.get<std::string>()) : std::nullopt;
    if (!parsed) throw FieldError("augment.ops: unknown operation " + op.dump());
    spec.enable(*parsed);
  }
  if (j.contains("flip_probability"))
    spec.flip_probability = number(j["flip_probability"], "augment.flip_probability");
  if (j.contains("rotation_range")) spec.rotation_range = range(j["rotation_range"], "augment.rotation_range");
  if (j.contains("scale_range")) spec.scale_range = range(j["scale_range"], "augment.scale_range");
  if (j.contains("contrast_range")) spec.contrast_range = range(j["contrast_range"], "augment.contrast_range");
  if (j.contains("brightness_range"))
    spec.brightness_range = range(j["brightness_range"], "augment.brightness_range");
  if (j.contains("hue_range")) spec.hue_range = range(j["hue_range"], "augment.hue_range");
  if (j.contains("saturation_range"))
    spec.saturation_range = range(j["saturation_range"], "augment.saturation_range");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FieldError(std::string("augment.") + e.what());
  }
  return spec;
}

inline MixUpMode parse_mixup(const json& j) {
  if (j.is_string()) {
    const auto preset = mixup_preset(j.get<std::string>());
    if (!preset) throw FieldError("mixup: unknown preset '" + j.get<std::string>() + "'");
    return *preset;
  }
  if (!j.is_object() || !j.contains("mode") || !j["mode"].is_string())
    throw FieldError("mixup.mode: expected \"random\", \"fixed\" or \"hard\"");
  const std::string mode = j["mode"].get<std::string>();
  MixUpMode m;
  if (mode == "random") {
    reject_unknown(j, "mixup", {"mode", "range"});
    m = MixUpMode::random();
    if (j.contains("range")) {
      const json& r = j["range"];
      if (!r.is_array() || r.size() != 2) throw FieldError("mixup.range: expected [lo, hi]");
      m.lo = number(r[0], "mixup.range[0]");
      m.hi = number(r[1], "mixup.range[1]");
      if (!(m.lo <= m.hi)) throw FieldError("mixup.range: lo > hi");
      if (!(m.lo >= 0 && m.hi <= 1)) throw FieldError("mixup.range: must lie in [0, 1]");
    }
  } else if (mode == "fixed") {
    reject_unknown(j, "mixup", {"mode", "lambda"});
    if (!j.contains("lambda")) throw FieldError("mixup.lambda: required for fixed mode");
    m = MixUpMode::fixed(number(j["lambda"], "mixup.lambda"));
    if (!(m.lambda >= 0 && m.lambda <= 1)) throw FieldError("mixup.lambda: must lie in [0, 1]");
  } else if (mode == "hard") {
    reject_unknown(j, "mixup", {"mode"});
    m = MixUpMode::hard_paste();
  } else {
    throw FieldError("mixup.mode: unknown mode '" + mode + "'");
  }
  return m;
}

inline CompositionStrategy parse_composition(const json& j) {
  if (j.is_string()) {
    const auto preset = composition_preset(j.get<std::string>());
    if (!preset) throw FieldError("composition: unknown preset '" + j.get<std::string>() + "'");
    return *preset;
  }
  if (!j.is_array() || j.empty()) throw FieldError("composition: expected a nonempty list of rules");
  CompositionStrategy s;
  double sum = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "composition[" + std::to_string(i) + "]";
    reject_unknown(j[i], where, {"probability", "types"});
    if (!j[i].contains("probability") || !j[i].contains("types"))
      throw FieldError(where + ": needs probability and types");
    CompositionRule rule;
    rule.probability = number(j[i]["probability"], where + ".probability");
    if (!(rule.probability >= 0 && rule.probability <= 1))
      throw FieldError(where + ".probability: must lie in [0, 1]");
    if (!j[i]["types"].is_array() || j[i]["types"].empty())
      throw FieldError(where + ".types: expected a nonempty list");
    for (const auto& t : j[i]["types"]) {
      const auto type = t.is_string() ? parse_lesion_type(t.get<std::string>()) : std::nullopt;
      if (!type) throw FieldError(where + ".types: unknown lesion type " + t.dump());
      rule.types.insert(*type);
    }
    sum += rule.probability;
    s.rules.push_back(rule);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "composition.probability: probabilities sum to " << sum << ", expected 1";
    throw FieldError(msg.str());
  }
  return s;
}

}  // namespace config_detail

// Parses and checks a run configuration. Unknown keys are errors.
inline ConfigResult validate_config(const std::string& text) {
  using namespace config_detail;
  ConfigResult result;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    result.diagnostics.push_back(std::string("config: invalid JSON: ") + e.what());
    return result;
  }
  if (!j.is_object()) {
    result.diagnostics.emplace_back("config: expected a JSON object");
    return result;
  }

  RunConfig cfg;
  auto section = [&](const char* key, auto&& parse) {
    if (!j.contains(key)) return;
    try {
      parse(j[key]);
    } catch (const FieldError& e) {
      result.diagnostics.emplace_back(e.what());
    }
  };

  static const std::set<std::string> known = {"seed",        "preprocess", "augment",     "mixup",
                                              "composition", "placement",  "connectivity"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) result.diagnostics.push_back(key + ": unknown key");

  if (!j.contains("seed"))
    result.diagnostics.emplace_back("seed: required (seeds must be explicit)");
  section("seed", [&](const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw FieldError("seed: expected a non-negative integer");
    cfg.seed = v.get<std::uint64_t>();
  });
  section("preprocess", [&](const json& v) { cfg.preprocess = parse_preprocess(v); });
  section("augment", [&](const json& v) { cfg.augment = parse_augment(v); });
  section("mixup", [&](const json& v) { cfg.mixup = parse_mixup(v); });
  section("composition", [&](const json& v) { cfg.composition = parse_composition(v); });
  section("placement", [&](const json& v) {
    const std::string p = v.is_string() ? v.get<std::string>() : "";
    if (p == "uniform")
      cfg.placement = PlacementMode::Uniform;
    else if (p == "fov")
      cfg.placement = PlacementMode::Fov;
    else
      throw FieldError("placement: expected \"uniform\" or \"fov\"");
  });
  section("connectivity", [&](const json& v) {
    if (!v.is_number_integer() || (v.get<int>() != 4 && v.get<int>() != 8))
      throw FieldError("connectivity: expected 4 or 8");
    cfg.connectivity = connectivity_from_int(v.get<int>());
  });

  if (result.diagnostics.empty()) result.config = cfg;
  return result;
}

inline nlohmann::json to_json(const AugmentSpec& spec) {
  nlohmann::json ops = nlohmann::json::array();
  for (AugmentOp op : kAugmentOrder)
    if (spec.is_enabled(op)) ops.push_back(std::string(to_string(op)));
  auto r = [](const Range& x) { return nlohmann::json::array({x.lo, x.hi}); };
  return {{"ops", ops},
          {"flip_probability", spec.flip_probability},
          {"rotation_range", r(spec.rotation_range)},
          {"scale_range", r(spec.scale_range)},
          {"contrast_range", r(spec.contrast_range)},
          {"brightness_range", r(spec.brightness_range)},
          {"hue_range", r(spec.hue_range)},
          {"saturation_range", r(spec.saturation_range)}};
}

inline nlohmann::json to_json(const MixUpMode& m) {
  switch (m.kind) {
    case MixUpMode::Kind::Random: return {{"mode", "random"}, {"range", {m.lo, m.hi}}};
    case MixUpMode::Kind::Fixed: return {{"mode", "fixed"}, {"lambda", m.lambda}};
    case MixUpMode::Kind::HardPaste: return {{"mode", "hard"}};
  }
  return {};
}

inline nlohmann::json to_json(const CompositionStrategy& s) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : s.rules) {
    nlohmann::json types = nlohmann::json::array();
    for (LesionType t : r.types.members()) types.push_back(std::string(to_string(t)));
    rules.push_back({{"probability", r.probability}, {"types", types}});
  }
  return rules;
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json pre{{"fov_crop", c.preprocess.fov_crop},
                     {"fov_threshold", c.preprocess.fov.threshold},
                     {"size", c.preprocess.size}};
  pre["window"] = c.preprocess.window
                      ? nlohmann::json{{"level", c.preprocess.window->level},
                                       {"width", c.preprocess.window->width}}
                      : nlohmann::json(nullptr);
  return {{"seed", c.seed},
          {"preprocess", pre},
          {"augment", to_json(c.augment)},
          {"mixup", to_json(c.mixup)},
          {"composition", to_json(c.composition)},
          {"placement", c.placement == PlacementMode::Fov ? "fov" : "uniform"},
          {"connectivity", static_cast<int>(c.connectivity)}};
}

}  // namespace lesionforge

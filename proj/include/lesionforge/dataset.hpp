#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lesionforge/config.hpp"
#include "lesionforge/lesion_bank.hpp"
#include "lesionforge/png_io.hpp"
#include "lesionforge/preprocess.hpp"
#include "lesionforge/rng.hpp"
#include "lesionforge/synth.hpp"

namespace lesionforge {

struct NormalEntry {
  std::string id;
  std::filesystem::path path;
};

// Accepts either a JSON array of {"id", "path"} objects or {"images": [...]}.
// Relative paths resolve against the manifest's directory.
inline std::vector<NormalEntry> load_normals_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open " + manifest.string());
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.is_object()) j = j.at("images");
  if (!j.is_array()) throw std::invalid_argument("normals manifest must list images");
  std::vector<NormalEntry> out;
  for (const auto& e : j) {
    NormalEntry n{e.at("id").get<std::string>(), e.at("path").get<std::string>()};
    if (n.path.is_relative()) n.path = manifest.parent_path() / n.path;
    out.push_back(std::move(n));
  }
  return out;
}

inline std::string file_safe(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

inline nlohmann::json to_json(const PasteRecord& r) {
  return {{"lesion_type", std::string(to_string(r.lesion_type))},
          {"source_id", r.source_id},
          {"component_id", r.component_id},
          {"x", r.position.x},
          {"y", r.position.y},
          {"width", r.width},
          {"height", r.height},
          {"lambda", r.lambda},
          {"augmentation_log", augment_log_to_json(r.augmentation_log)}};
}

inline PasteRecord paste_record_from_json(const nlohmann::json& j) {
  PasteRecord r;
  const auto type = parse_lesion_type(j.at("lesion_type").get<std::string>());
  if (!type) throw std::invalid_argument("unknown lesion type in paste log");
  r.lesion_type = *type;
  r.source_id = j.at("source_id").get<std::string>();
  r.component_id = j.at("component_id").get<int>();
  r.position = {j.at("x").get<int>(), j.at("y").get<int>()};
  r.width = j.at("width").get<int>();
  r.height = j.at("height").get<int>();
  r.lambda = j.at("lambda").get<float>();
  r.augmentation_log = augment_log_from_json(j.at("augmentation_log"));
  return r;
}

struct ManifestRecord {
  std::string path;  // relative to the dataset directory
  int label = 0;
  std::string source;
  std::vector<PasteRecord> paste_log;
};

inline std::vector<ManifestRecord> read_dataset_manifest(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw std::runtime_error("cannot open " + jsonl.string());
  std::vector<ManifestRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ManifestRecord r;
    r.path = j.at("path").get<std::string>();
    r.label = j.at("label").get<int>();
    r.source = j.at("source").get<std::string>();
    for (const auto& p : j.at("paste_log")) r.paste_log.push_back(paste_record_from_json(p));
    out.push_back(std::move(r));
  }
  return out;
}

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kRunConfigFile = "run_config.json";

// Per-image stream: depends only on the root seed and the image id.
inline RngStream image_stream(std::uint64_t seed, const std::string& id) {
  return RngStream(seed, hash_string(id));
}

// Preprocessed normal image plus its placement mask (when placement is FOV-constrained).
struct PreparedNormal {
  Image image;
  std::optional<BinaryMask> placement;
};

inline PreparedNormal prepare_normal(const Image& raw, const RunConfig& cfg) {
  PreparedNormal out{preprocess(raw, cfg.preprocess), std::nullopt};
  if (cfg.placement == PlacementMode::Fov) out.placement = detect_fov(out.image, cfg.preprocess.fov);
  return out;
}

// Writes normal/<id>.png (label 0) and anomalous/<id>.png (label 1) for every
// normal image, then manifest.jsonl sorted by (source, label) and the verbatim
// run configuration. Output depends only on the inputs and the seed, not on
// thread count or input order.
inline std::vector<ManifestRecord> synthesize_dataset(const std::vector<NormalEntry>& normals,
                                                      const LesionBank& bank, const RunConfig& cfg,
                                                      const std::filesystem::path& out_dir,
                                                      const std::string& raw_config,
                                                      unsigned threads = 1) {
  bank.validate();
  cfg.recipe().augment.validate();
  cfg.mixup.validate();
  cfg.composition.validate();

  std::set<std::string> names;
  for (const auto& n : normals)
    if (!names.insert(file_safe(n.id)).second)
      throw std::invalid_argument("duplicate normal image id '" + n.id + "'");

  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "normal");
  fs::create_directories(out_dir / "anomalous");

  std::vector<std::vector<PasteRecord>> logs(normals.size());
  std::vector<std::exception_ptr> errors(normals.size());
  std::atomic<std::size_t> next{0};
  const SynthesisRecipe recipe = cfg.recipe();

  auto worker = [&] {
    for (std::size_t i = next++; i < normals.size(); i = next++) {
      try {
        const auto& entry = normals[i];
        const PreparedNormal prepared = prepare_normal(read_png(entry.path), cfg);
        const SyntheticSample sample =
            synthesize_one(prepared.image, entry.id, bank, recipe,
                           prepared.placement ? &*prepared.placement : nullptr,
                           image_stream(cfg.seed, entry.id));
        const std::string name = file_safe(entry.id) + ".png";
        write_png(out_dir / "normal" / name, prepared.image);
        write_png(out_dir / "anomalous" / name, sample.to_image());
        logs[i] = sample.paste_log;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::size_t> order(normals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return normals[a].id < normals[b].id; });

  std::vector<ManifestRecord> records;
  std::ofstream manifest(out_dir / kManifestFile, std::ios::binary);
  for (std::size_t i : order) {
    const std::string name = file_safe(normals[i].id) + ".png";
    records.push_back({"normal/" + name, 0, normals[i].id, {}});
    records.push_back({"anomalous/" + name, 1, normals[i].id, logs[i]});
  }
  for (const auto& r : records) {
    nlohmann::json pastes = nlohmann::json::array();
    for (const auto& p : r.paste_log) pastes.push_back(to_json(p));
    const nlohmann::json line{
        {"path", r.path}, {"label", r.label}, {"source", r.source}, {"paste_log", pastes}};
    manifest << line.dump() << '\n';
  }
  if (!manifest) throw std::runtime_error("failed to write manifest");

  std::ofstream config_copy(out_dir / kRunConfigFile, std::ios::binary);
  config_copy << raw_config;
  if (!config_copy) throw std::runtime_error("failed to write run config copy");
  return records;
}

}  // namespace lesionforge

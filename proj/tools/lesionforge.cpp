#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lesionforge/lesionforge.hpp"

namespace fs = std::filesystem;
using namespace lesionforge;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct PreprocessFlags {
  std::optional<double> window_level;
  std::optional<double> window_width;
  std::string fov_crop = "off";
  int size = 256;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--window-level", window_level, "CT window level in HU (enables windowing)");
    cmd->add_option("--window-width", window_width, "CT window width in HU (enables windowing)");
    cmd->add_option("--fov-crop", fov_crop, "crop to the field-of-view square")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--size", size, "canonical side length, 0 keeps the input size")
        ->check(CLI::NonNegativeNumber);
  }

  PreprocessOptions options() const {
    PreprocessOptions opt;
    if (window_level || window_width)
      opt.window = WindowSpec{window_level.value_or(WindowSpec::lung().level),
                              window_width.value_or(WindowSpec::lung().width)};
    opt.fov_crop = fov_crop == "on";
    opt.size = size;
    return opt;
  }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_extract(const fs::path& image_path, const std::vector<std::pair<LesionType, std::string>>& masks,
                const fs::path& out, const std::string& source_id, int connectivity,
                const PreprocessFlags& pre) {
  std::vector<TypedMask> annotation;
  const PreprocessOptions opt = pre.options();
  const Image windowed = apply_window(read_png(image_path), opt);
  const PreprocessPlan plan = plan_preprocess(windowed, opt);
  const Image image = apply_plan(windowed, plan);
  for (const auto& [type, path] : masks) {
    if (path.empty()) continue;
    const BinaryMask m = read_mask_png(path);
    if (m.width != windowed.width || m.height != windowed.height)
      throw std::invalid_argument("mask " + path + " does not match the image size");
    annotation.push_back({type, apply_plan(m, plan)});
  }
  if (annotation.empty()) throw std::invalid_argument("no annotation masks given");
  const std::string id = source_id.empty() ? image_path.stem().string() : source_id;
  const LesionBank bank = extract_patches(image, annotation, id, connectivity_from_int(connectivity));
  save_bank(bank, out);
  std::cout << "extracted " << bank.patches.size() << " lesion patches (n_l = " << bank.n_l
            << ") into " << out.string() << '\n';
  return 0;
}

int run_synth(const fs::path& bank_dir, const fs::path& normals, const fs::path& config_path,
              const fs::path& out, unsigned threads) {
  const std::string raw = read_text(config_path);
  const ConfigResult cfg = validate_config(raw);
  if (!cfg.ok()) {
    for (const auto& d : cfg.diagnostics) std::cerr << "config error: " << d << '\n';
    return kExitUsage;
  }
  const LesionBank bank = load_bank(bank_dir);
  const auto entries = load_normals_manifest(normals);
  const auto records = synthesize_dataset(entries, bank, *cfg.config, out, raw, threads);
  std::cout << "wrote " << records.size() << " samples to " << out.string() << '\n';
  return 0;
}

void write_roc(const fs::path& path, const ScoredSet& s) {
  std::ofstream out(path);
  out << "fpr,tpr\n";
  out.precision(17);
  for (const auto& p : roc_curve(s)) out << p.fpr << ',' << p.tpr << '\n';
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

int run_eval(const fs::path& scores_a, const std::optional<fs::path>& scores_b,
             const std::optional<fs::path>& roc, const std::optional<fs::path>& report_path) {
  const ScoredSet a = read_scores_csv(scores_a);
  nlohmann::json report;
  report["a"] = {{"file", scores_a.string()},
                 {"n", a.scores.size()},
                 {"positives", a.positives()},
                 {"negatives", a.negatives()},
                 {"auc", auc(a)},
                 {"auc_variance", delong_variance(a)}};
  if (roc) write_roc(*roc, a);
  if (scores_b) {
    const ScoredSet b = align_by_id(a, read_scores_csv(*scores_b));
    const DeLongResult d = delong_test(a, b);
    report["b"] = {{"file", scores_b->string()}, {"n", b.scores.size()}, {"auc", d.auc_b}};
    report["delong"] = {{"auc_a", d.auc_a},       {"auc_b", d.auc_b}, {"var_a", d.var_a},
                        {"var_b", d.var_b},       {"covariance", d.covariance},
                        {"z", d.z},               {"p_value", d.p_value}};
  }
  const std::string text = report.dump(2);
  if (report_path) {
    std::ofstream out(*report_path);
    out << text << '\n';
  }
  std::cout << text << '\n';
  return 0;
}

int run_montage(const fs::path& dataset, int k, const fs::path& out) {
  const Montage m = make_montage(dataset, k);
  write_png(out, m.image);
  std::cout << "montage with " << m.tiles << " tiles written to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lesionforge: synthetic anomaly generation from one annotated lesion image"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "build a lesion bank from an annotated image");
  fs::path ex_image, ex_out;
  std::string ex_source;
  int ex_conn = 8;
  std::vector<std::pair<LesionType, std::string>> ex_masks;
  for (LesionType t : kAllLesionTypes) ex_masks.emplace_back(t, "");
  PreprocessFlags ex_pre;
  extract->add_option("--image", ex_image, "annotated image (PNG)")->required()->check(CLI::ExistingFile);
  for (auto& [type, path] : ex_masks) {
    std::string flag = "--mask-" + std::string(to_string(type));
    for (auto& ch : flag) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    extract->add_option(flag, path, std::string(to_string(type)) + " lesion mask (PNG)")
        ->check(CLI::ExistingFile);
  }
  extract->add_option("--out", ex_out, "bank directory")->required();
  extract->add_option("--source-id", ex_source, "provenance id (default: image file stem)");
  extract->add_option("--connectivity", ex_conn, "4 or 8")->check(CLI::IsMember({4, 8}));
  ex_pre.add_to(extract);

  // synth
  auto* synth = app.add_subcommand("synth", "synthesize an anomalous dataset");
  fs::path sy_bank, sy_normals, sy_config, sy_out;
  unsigned sy_threads = 1;
  synth->add_option("--bank", sy_bank, "lesion bank directory")->required()->check(CLI::ExistingDirectory);
  synth->add_option("--normals", sy_normals, "normal image manifest (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--config", sy_config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", sy_out, "output dataset directory")->required();
  synth->add_option("--threads", sy_threads, "worker threads")->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "AUC and DeLong comparison from score CSVs");
  fs::path ev_a;
  std::optional<fs::path> ev_b, ev_roc, ev_out;
  eval->add_option("--scores", ev_a, "CSV with columns id,score,label")->required()->check(CLI::ExistingFile);
  eval->add_option("--scores-b", ev_b, "second classifier on the same samples")->check(CLI::ExistingFile);
  eval->add_option("--roc", ev_roc, "write the ROC polyline of --scores as CSV");
  eval->add_option("--report", ev_out, "also write the JSON report to this file");

  // montage
  auto* montage = app.add_subcommand("montage", "tile synthetic samples beside their normals");
  fs::path mo_dataset, mo_out;
  int mo_k = 4;
  montage->add_option("--dataset", mo_dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  montage->add_option("--k", mo_k, "number of sample pairs")->check(CLI::PositiveNumber);
  montage->add_option("--out", mo_out, "output PNG")->required();

  // config
  auto* config = app.add_subcommand("config", "print a run configuration built from presets");
  std::uint64_t cf_seed = 0;
  std::string cf_augment = "default", cf_mixup = "random", cf_composition = "any",
              cf_placement = "uniform";
  int cf_conn = 8;
  PreprocessFlags cf_pre;
  config->add_option("--seed", cf_seed, "root seed")->required();
  std::vector<std::string> augment_names;
  for (const auto& [name, spec] : augment_presets()) augment_names.push_back(name);
  config->add_option("--augment-preset", cf_augment, "augmentation preset")
      ->check(CLI::IsMember(augment_names));
  config->add_option("--mixup-preset", cf_mixup, "random | none | 0.5 | 0.7 | 0.8")
      ->check(CLI::IsMember({"random", "none", "hard", "0.5", "0.7", "0.8"}));
  config->add_option("--composition", cf_composition, "any | dr-grades")
      ->check(CLI::IsMember({"any", "dr-grades"}));
  config->add_option("--placement", cf_placement, "uniform | fov")->check(CLI::IsMember({"uniform", "fov"}));
  config->add_option("--connectivity", cf_conn, "4 or 8")->check(CLI::IsMember({4, 8}));
  cf_pre.add_to(config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return run_extract(ex_image, ex_masks, ex_out, ex_source, ex_conn, ex_pre);
    if (*synth) return run_synth(sy_bank, sy_normals, sy_config, sy_out, sy_threads);
    if (*eval) return run_eval(ev_a, ev_b, ev_roc, ev_out);
    if (*montage) return run_montage(mo_dataset, mo_k, mo_out);
    if (*config) {
      RunConfig cfg;
      cfg.seed = cf_seed;
      cfg.preprocess = cf_pre.options();
      cfg.augment = *augment_preset(cf_augment);
      cfg.mixup = *mixup_preset(cf_mixup);
      cfg.composition = *composition_preset(cf_composition);
      cfg.placement = cf_placement == "fov" ? PlacementMode::Fov : PlacementMode::Uniform;
      cfg.connectivity = connectivity_from_int(cf_conn);
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

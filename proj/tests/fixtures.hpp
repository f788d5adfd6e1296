#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lesionforge/dataset.hpp"
#include "lesionforge/lesion_bank.hpp"
#include "lesionforge/png_io.hpp"

namespace fixture {

using namespace lesionforge;

inline void fill_disk(BinaryMask& m, double cx, double cy, double r) {
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if ((x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy) <= r * r) m.at(x, y) = 1;
}

// Bright textured RGB "fundus" image inside a disk on a black frame.
inline Image fundus(int side, std::uint64_t seed = 1) {
  Image img(side, side, 3, 8);
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> noise(-12, 12);
  BinaryMask disk(side, side);
  fill_disk(disk, side / 2.0, side / 2.0, side * 0.45);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      if (!disk.at(x, y)) continue;
      img.at(x, y, 0) = static_cast<std::uint16_t>(170 + noise(gen));
      img.at(x, y, 1) = static_cast<std::uint16_t>(90 + noise(gen));
      img.at(x, y, 2) = static_cast<std::uint16_t>(50 + noise(gen));
    }
  return img;
}

// Annotated image with 3 MA blobs, 2 HE blobs, 1 SE blob and 1 EX blob.
struct AnnotatedSample {
  Image image;
  std::vector<TypedMask> masks;
};

inline AnnotatedSample annotated_fundus(int side = 128) {
  AnnotatedSample s{fundus(side, 7), {}};
  auto blob = [&](BinaryMask& m, double cx, double cy, double r, std::uint16_t rr, std::uint16_t gg,
                  std::uint16_t bb) {
    BinaryMask one(side, side);
    fill_disk(one, cx, cy, r);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        if (one.at(x, y)) {
          m.at(x, y) = 1;
          s.image.at(x, y, 0) = rr;
          s.image.at(x, y, 1) = gg;
          s.image.at(x, y, 2) = bb;
        }
  };
  BinaryMask ma(side, side), he(side, side), se(side, side), ex(side, side);
  blob(ma, 40, 40, 2.0, 120, 20, 20);
  blob(ma, 80, 50, 1.5, 120, 20, 20);
  blob(ma, 60, 90, 2.5, 120, 20, 20);
  blob(he, 30, 70, 5.0, 90, 10, 10);
  blob(he, 95, 85, 6.0, 90, 10, 10);
  blob(se, 70, 30, 5.0, 230, 230, 200);
  blob(ex, 50, 60, 4.0, 250, 240, 120);
  s.masks = {{LesionType::MA, ma}, {LesionType::HE, he}, {LesionType::SE, se}, {LesionType::EX, ex}};
  return s;
}

inline LesionBank dr_bank() {
  const auto s = annotated_fundus();
  return extract_patches(s.image, s.masks, "fixture");
}

// Small RGB patch with a random compact lesion.
inline LesionPatch random_patch(std::mt19937_64& gen, int max_side, int channels = 3) {
  std::uniform_int_distribution<int> side(1, max_side);
  const int w = side(gen), h = side(gen);
  LesionPatch p;
  p.pixels = FloatRaster(w, h, channels);
  std::uniform_real_distribution<float> v(0.0f, 1.0f);
  for (auto& x : p.pixels.values) x = v(gen);
  p.mask = BinaryMask(w, h);
  fill_disk(p.mask, w / 2.0, h / 2.0, std::max(w, h) / 2.0);
  std::bernoulli_distribution extra(0.3);
  for (auto& b : p.mask.bits)
    if (extra(gen)) b = 1;
  // Force a tight box.
  p.mask.at(0, h / 2) = 1;
  p.mask.at(w - 1, h / 2) = 1;
  p.mask.at(w / 2, 0) = 1;
  p.mask.at(w / 2, h - 1) = 1;
  p.lesion_type = LesionType::MA;
  p.source_id = "rand";
  p.component_id = 1;
  return p;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lesionforge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Writes n small fundus images plus normals.json into dir.
inline std::vector<NormalEntry> write_normals(const std::filesystem::path& dir, int n, int side = 64) {
  std::filesystem::create_directories(dir);
  std::vector<NormalEntry> out;
  nlohmann::json list = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const std::string id = "normal_" + std::to_string(i);
    const auto path = dir / (id + ".png");
    write_png(path, fundus(side, 100 + i));
    out.push_back({id, path});
    list.push_back({{"id", id}, {"path", id + ".png"}});
  }
  std::ofstream(dir / "normals.json") << list.dump(2);
  return out;
}

// Relative path -> file bytes, for comparing whole output trees.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[std::filesystem::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

inline std::uint64_t tree_hash(const std::filesystem::path& root) {
  std::uint64_t h = 0;
  for (const auto& [name, bytes] : read_tree(root)) h = hash_combine(h, hash_string(name + '\0' + bytes));
  return h;
}

}  // namespace fixture

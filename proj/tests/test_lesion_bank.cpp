#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <random>

#include "fixtures.hpp"
#include "lesionforge/ccl.hpp"
#include "lesionforge/lesion_bank.hpp"
#include "oracles.hpp"

using namespace lesionforge;

TEST(LabelComponents, EmptyMask) {
  const auto labels = label_components(BinaryMask(8, 8));
  EXPECT_EQ(labels.count, 0);
}

TEST(LabelComponents, DiagonalNeighboursDependOnConnectivity) {
  BinaryMask m(2, 2);
  m.at(0, 0) = 1;
  m.at(1, 1) = 1;
  EXPECT_EQ(label_components(m, Connectivity::Eight).count, 1);
  EXPECT_EQ(label_components(m, Connectivity::Four).count, 2);
}

TEST(LabelComponents, UShapeMergesAcrossRows) {
  // Two arms that only join on the last row exercise the equivalence table.
  BinaryMask m(5, 4);
  for (int y = 0; y < 4; ++y) {
    m.at(0, y) = 1;
    m.at(4, y) = 1;
  }
  for (int x = 0; x < 5; ++x) m.at(x, 3) = 1;
  const auto labels = label_components(m, Connectivity::Four);
  EXPECT_EQ(labels.count, 1);
}

TEST(LabelComponents, MatchesFloodFillOnRandomMasks) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> side(1, 64);
  std::uniform_real_distribution<double> density(0.05, 0.7);
  for (int i = 0; i < 1000; ++i) {
    const BinaryMask m = oracle::random_mask(gen, side(gen), side(gen), density(gen));
    for (int conn : {4, 8}) {
      int expected = 0;
      const auto ref = oracle::flood_fill_labels(m, conn, &expected);
      const auto got = label_components(m, connectivity_from_int(conn));
      ASSERT_EQ(got.count, expected);
      ASSERT_TRUE(oracle::same_partition(got.labels, ref)) << "case " << i << " conn " << conn;
    }
  }
}

TEST(LabelComponents, LabelsAreConsecutive) {
  std::mt19937_64 gen(5);
  const BinaryMask m = oracle::random_mask(gen, 40, 40, 0.3);
  const auto labels = label_components(m);
  const auto areas = component_areas(labels);
  for (int l = 1; l <= labels.count; ++l) EXPECT_GT(areas[l], 0u);
}

TEST(ExtractPatches, CountsPerTypeAgreeWithFloodFill) {
  const int side = 64;
  Image img(side, side, 3, 8);
  BinaryMask ma(side, side), he(side, side);
  fixture::fill_disk(ma, 10, 10, 3);
  fixture::fill_disk(ma, 40, 12, 2);
  fixture::fill_disk(ma, 20, 50, 4);
  fixture::fill_disk(he, 50, 50, 6);
  const LesionBank bank = extract_patches(img, {{LesionType::MA, ma}, {LesionType::HE, he}}, "img");
  EXPECT_EQ(bank.patches.size(), 4u);
  EXPECT_EQ(bank.n_l, 4);
  int ma_ref = 0, he_ref = 0;
  oracle::flood_fill_labels(ma, 8, &ma_ref);
  oracle::flood_fill_labels(he, 8, &he_ref);
  std::map<LesionType, int> counts;
  for (const auto& p : bank.patches) ++counts[p.lesion_type];
  EXPECT_EQ(counts[LesionType::MA], ma_ref);
  EXPECT_EQ(counts[LesionType::HE], he_ref);
  EXPECT_EQ(counts[LesionType::MA], 3);
  EXPECT_EQ(counts[LesionType::HE], 1);
  EXPECT_NO_THROW(bank.validate());
}

TEST(ExtractPatches, SinglePixelLesion) {
  Image img(5, 5, 1, 8);
  img.at(2, 3) = 200;
  BinaryMask m(5, 5);
  m.at(2, 3) = 1;
  const LesionBank bank = extract_patches(img, {{LesionType::OTHER, m}}, "px");
  ASSERT_EQ(bank.patches.size(), 1u);
  const auto& p = bank.patches[0];
  EXPECT_EQ(p.width(), 1);
  EXPECT_EQ(p.height(), 1);
  EXPECT_EQ(p.mask.bits, std::vector<std::uint8_t>{1});
  EXPECT_FLOAT_EQ(p.pixels.values[0], 200.0f / 255.0f);
}

TEST(ExtractPatches, EmptyAnnotationRejected) {
  const Image img(8, 8, 1, 8);
  EXPECT_THROW(extract_patches(img, {{LesionType::MA, BinaryMask(8, 8)}}, "x"), std::invalid_argument);
  EXPECT_THROW(extract_patches(img, {}, "x"), std::invalid_argument);
}

TEST(ExtractPatches, MisalignedMaskRejected) {
  const Image img(8, 8, 1, 8);
  EXPECT_THROW(extract_patches(img, {{LesionType::MA, BinaryMask(7, 8, 1)}}, "x"),
               std::invalid_argument);
}

TEST(ExtractPatches, AreaConservedAndBoxesTight) {
  std::mt19937_64 gen(77);
  for (int i = 0; i < 50; ++i) {
    const BinaryMask m = oracle::random_mask(gen, 48, 40, 0.25);
    if (m.empty()) continue;
    const Image img(48, 40, 1, 8);
    const LesionBank bank = extract_patches(img, {{LesionType::HE, m}}, "r");
    std::size_t total = 0;
    for (const auto& p : bank.patches) {
      EXPECT_NO_THROW(p.validate());
      total += p.mask.area();
    }
    EXPECT_EQ(total, m.area());
  }
}

TEST(ExtractPatches, ComponentIdsUniqueAcrossTypes) {
  const LesionBank bank = fixture::dr_bank();
  EXPECT_EQ(bank.n_l, 7);
  std::set<int> ids;
  for (const auto& p : bank.patches) ids.insert(p.component_id);
  EXPECT_EQ(ids.size(), bank.patches.size());
  EXPECT_EQ(bank.component_count({LesionType::MA}), 3);
  EXPECT_EQ(bank.component_count({LesionType::MA, LesionType::HE}), 5);
}

TEST(SamplePasteCount, RangeForSmallAndLargeBanks) {
  RngStream rng(1, 1);
  std::set<int> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(sample_paste_count(1, rng));
  EXPECT_EQ(seen, (std::set<int>{1, 2}));
  seen.clear();
  for (int i = 0; i < 5000; ++i) {
    const int n = sample_paste_count(10, rng);
    ASSERT_GE(n, 1);
    ASSERT_LE(n, 15);
    seen.insert(n);
  }
  EXPECT_EQ(seen.size(), 15u);
  EXPECT_THROW(sample_paste_count(0, rng), std::invalid_argument);
}

TEST(SamplePasteCount, NeverExceedsRoundedBound) {
  RngStream rng(3, 3);
  for (int n_l = 1; n_l <= 40; ++n_l)
    for (int i = 0; i < 200; ++i) {
      const int n = sample_paste_count(n_l, rng);
      ASSERT_GE(n, 1);
      ASSERT_LE(n, static_cast<int>(std::floor(1.5 * n_l + 0.5)));
    }
}

TEST(SamplePasteCount, ChiSquareUniform) {
  RngStream rng(2026, 0);
  std::vector<long long> counts(15, 0);
  for (int i = 0; i < 100000; ++i) ++counts[sample_paste_count(10, rng) - 1];
  EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.01);
}

TEST(ResamplePatches, WithReplacementAndFilter) {
  const int side = 64;
  Image img(side, side, 3, 8);
  BinaryMask ma(side, side), he(side, side);
  fixture::fill_disk(ma, 10, 10, 3);
  fixture::fill_disk(ma, 40, 12, 2);
  fixture::fill_disk(ma, 20, 50, 4);
  fixture::fill_disk(he, 50, 50, 6);
  const LesionBank bank = extract_patches(img, {{LesionType::MA, ma}, {LesionType::HE, he}}, "img");
  RngStream rng(4, 4);
  const auto all = resample_patches(bank, 10, LesionTypeSet::all(), rng);
  EXPECT_EQ(all.size(), 10u);
  for (const auto& p : all)
    EXPECT_NE(std::find(bank.patches.begin(), bank.patches.end(), p), bank.patches.end());
  for (const auto& p : resample_patches(bank, 50, {LesionType::MA}, rng))
    EXPECT_EQ(p.lesion_type, LesionType::MA);
  EXPECT_THROW(resample_patches(bank, 3, {LesionType::EX}, rng), std::invalid_argument);
}

TEST(ResamplePatches, UniformOverBank) {
  const int side = 64;
  Image img(side, side, 1, 8);
  BinaryMask m(side, side);
  fixture::fill_disk(m, 10, 10, 3);
  fixture::fill_disk(m, 40, 12, 2);
  fixture::fill_disk(m, 20, 50, 4);
  fixture::fill_disk(m, 50, 50, 6);
  const LesionBank bank = extract_patches(img, {{LesionType::OTHER, m}}, "u");
  ASSERT_EQ(bank.patches.size(), 4u);
  RngStream rng(8, 8);
  std::map<int, int> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    ++freq[resample_patches(bank, 1, LesionTypeSet::all(), rng)[0].component_id];
  for (const auto& [id, n] : freq) EXPECT_NEAR(static_cast<double>(n) / draws, 0.25, 0.01);
}

TEST(BankPersistence, SaveLoadRoundTrip) {
  const LesionBank bank = fixture::dr_bank();
  const auto dir = fixture::temp_dir("bank");
  save_bank(bank, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "patch_0000.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "patch_0000_mask.png"));
  const LesionBank loaded = load_bank(dir);
  EXPECT_EQ(loaded.n_l, bank.n_l);
  ASSERT_EQ(loaded.patches.size(), bank.patches.size());
  for (std::size_t i = 0; i < bank.patches.size(); ++i) {
    EXPECT_EQ(loaded.patches[i].mask, bank.patches[i].mask);
    EXPECT_EQ(loaded.patches[i].lesion_type, bank.patches[i].lesion_type);
    EXPECT_EQ(loaded.patches[i].component_id, bank.patches[i].component_id);
    // Extracted pixels came from 8-bit samples, so they survive quantization exactly.
    EXPECT_EQ(loaded.patches[i].pixels, bank.patches[i].pixels);
  }
}

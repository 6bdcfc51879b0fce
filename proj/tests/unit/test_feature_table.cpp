#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "optomx/features.hpp"

using namespace optomx;
using testutil::TempDir;
using testutil::TestRand;

TEST_CASE("per-image feature count is 92 and the full vector 1472") {
  CHECK(kFeaturesPerImage == 92);
  TestRand rnd(9);
  const GrayImage patch = testutil::random_patch(rnd, 8);
  const auto single = image_features(patch, 8);
  CHECK(single.size() == 92);
  const auto bank = default_bank();
  const auto full = optomic_vector(patch, bank, 8);
  CHECK(full.size() == 1472);
  const auto names = feature_names(bank);
  CHECK(names.size() == 1472);
  for (double v : full) CHECK(std::isfinite(v));
}

TEST_CASE("vector layout is original first then bank order") {
  TestRand rnd(10);
  const GrayImage patch = testutil::random_patch(rnd, 8, 0.5);
  const auto bank = default_bank();
  const auto full = optomic_vector(patch, bank, 6);
  const auto original = image_features(patch, 6);
  for (std::size_t i = 0; i < original.size(); ++i) CHECK(full[i] == original[i]);
  for (std::size_t b = 0; b < bank.size(); ++b) {
    const auto filtered = image_features(apply_filter(patch, bank[b]), 6);
    const std::size_t off = (b + 1) * 92;
    for (std::size_t i = 0; i < filtered.size(); ++i)
      CHECK(full[off + i] == filtered[i]);
  }
}

TEST_CASE("feature names carry image, family and feature") {
  const auto names = feature_names(default_bank());
  CHECK(names[0] == "original_firstorder_Energy");
  CHECK(names[18] == "original_glcm_Autocorrelation");
  CHECK(names[18 + 23] == "original_glrlm_ShortRunEmphasis");
  CHECK(names[18 + 23 + 16] == "original_glszm_SmallAreaEmphasis");
  CHECK(names[18 + 23 + 32] == "original_gldm_SmallDependenceEmphasis");
  CHECK(names[18 + 23 + 32 + 14] == "original_ngtdm_Coarseness");
  CHECK(names[92] == "wavelet-LL_firstorder_Energy");
  CHECK(names[92 * 15] == "lbp-2D_firstorder_Energy");
  CHECK(names.back() == "lbp-2D_ngtdm_Strength");
}

TEST_CASE("table subsetting keeps rows aligned") {
  FeatureTable t;
  t.names = {"f1", "f2"};
  for (int i = 0; i < 5; ++i) {
    PatchMeta m;
    m.slice_id = i < 3 ? "A" : "B";
    m.patch_id = i;
    m.label = i % 2;
    t.meta.push_back(m);
    t.values.push_back(10.0 * i);
    t.values.push_back(10.0 * i + 1);
  }
  CHECK(t.rows() == 5);
  CHECK(t.cols() == 2);
  CHECK(t.labels() == std::vector<int>{0, 1, 0, 1, 0});
  CHECK(t.rows_of_slices({"A"}) == std::vector<std::size_t>{0, 1, 2});
  CHECK(t.rows_of_slices({"A"}, true) == std::vector<std::size_t>{3, 4});
  const FeatureTable sub = t.subset({4, 1});
  CHECK(sub.rows() == 2);
  CHECK(sub.meta[0].patch_id == 4);
  CHECK(sub.row(0)[0] == 40.0);
  CHECK(sub.row(1)[1] == 11.0);
}

TEST_CASE("feature csv round-trips bitwise") {
  TempDir dir("featcsv");
  TestRand rnd(13);
  FeatureTable t;
  t.names = {"a_b_c", "d_e_f", "g_h_i"};
  for (int i = 0; i < 7; ++i) {
    PatchMeta m;
    m.slice_id = "S" + std::to_string(i % 3);
    m.patient_id = "P" + std::to_string(i % 2);
    m.dose_group = 1 + i % 3;
    m.patch_id = i;
    m.center_row_px = 40 + i;
    m.center_col_px = 60 - i;
    m.size_mm = 0.88;
    m.label = i % 2;
    t.meta.push_back(m);
    for (int c = 0; c < 3; ++c) t.values.push_back(rnd.range(-5.0, 5.0));
  }
  // A few awkward reals.
  t.values[0] = 1.0 / 3.0;
  t.values[1] = 1e-17;
  t.values[2] = -0.0;
  const std::string path = dir.file("f.csv");
  write_feature_csv(path, t, 0xabc12345u);

  std::uint32_t hash = 0;
  const FeatureTable back = read_feature_csv(path, hash);
  CHECK(hash == 0xabc12345u);
  REQUIRE(back.rows() == t.rows());
  REQUIRE(back.names == t.names);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    CHECK(back.meta[r].slice_id == t.meta[r].slice_id);
    CHECK(back.meta[r].patient_id == t.meta[r].patient_id);
    CHECK(back.meta[r].dose_group == t.meta[r].dose_group);
    CHECK(back.meta[r].patch_id == t.meta[r].patch_id);
    CHECK(back.meta[r].center_row_px == t.meta[r].center_row_px);
    CHECK(back.meta[r].center_col_px == t.meta[r].center_col_px);
    CHECK(back.meta[r].size_mm == t.meta[r].size_mm);
    CHECK(back.meta[r].label == t.meta[r].label);
    for (std::size_t c = 0; c < t.cols(); ++c) {
      // 17 significant digits restore doubles exactly.
      CHECK(back.row(r)[c] == t.row(r)[c]);
    }
  }

  // Writing the reread table reproduces the file byte for byte.
  const std::string path2 = dir.file("f2.csv");
  write_feature_csv(path2, back, hash);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("feature csv rejects tampered headers") {
  TempDir dir("featbad");
  {
    std::ofstream out(dir.file("nohash.csv"));
    out << "slice_id,patient_id\n";
  }
  std::uint32_t hash = 0;
  CHECK_THROWS_AS(read_feature_csv(dir.file("nohash.csv"), hash), Error);
  {
    std::ofstream out(dir.file("badmeta.csv"));
    out << "# config_hash=00000001\n";
    out << "slice,patient_id,dose_group,patch_id,center_x_px,center_y_px,"
           "size_mm,label,f1\n";
  }
  CHECK_THROWS_AS(read_feature_csv(dir.file("badmeta.csv"), hash), Error);
}

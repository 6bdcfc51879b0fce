#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "optomx/model_io.hpp"

using namespace optomx;
using testutil::TestRand;

namespace {

FeatureTable blob_table(unsigned seed, int per_class = 15, int dim = 5) {
  FeatureTable t;
  for (int f = 0; f < dim; ++f) t.names.push_back("f" + std::to_string(f));
  TestRand rnd(seed);
  for (int i = 0; i < 2 * per_class; ++i) {
    PatchMeta m;
    m.slice_id = "s" + std::to_string(i % 3);
    m.patch_id = i;
    m.label = i < per_class ? 0 : 1;
    t.meta.push_back(m);
    for (int f = 0; f < dim; ++f)
      t.values.push_back((m.label ? 1.0 : -1.0) + 0.7 * rnd.normal());
  }
  return t;
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// Bitwise reflected CRC-32 (polynomial 0xEDB88320), independent of zlib.
std::uint32_t crc32_ref(const std::uint8_t* data, std::size_t n) {
  std::uint32_t crc = 0xffffffffu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int b = 0; b < 8; ++b)
      crc = (crc >> 1) ^ (0xedb88320u & (0u - (crc & 1u)));
  }
  return crc ^ 0xffffffffu;
}

}  // namespace

TEST_CASE("every pipeline kind survives a save/load round trip bit-exactly") {
  const std::pair<ModelKind, SelectorMethod> combos[] = {
      {ModelKind::RF, SelectorMethod::MRMR},
      {ModelKind::KNN, SelectorMethod::FSCR},
      {ModelKind::DT, SelectorMethod::CHSQ},
      {ModelKind::SVM, SelectorMethod::GINI},
      {ModelKind::BST, SelectorMethod::MIM},
      {ModelKind::BY, SelectorMethod::SRCC},
      {ModelKind::DA, SelectorMethod::PRCC},
  };
  const FeatureTable t = blob_table(41);
  ClassifierParams params;
  params.rf_trees = 10;
  params.bst_rounds = 8;
  testutil::TempDir tmp("model-io");
  TestRand probe(42);

  for (const auto& [kind, selector] : combos) {
    const TrainedPipeline p =
        fit_final(t, kind, selector, 3, params, 4, 77, 0xfeedbeefu);
    const std::string path =
        tmp.path() + "/" + classifier_name(kind) + ".optx";
    save_pipeline(path, p);
    const TrainedPipeline q = load_pipeline(path);

    CHECK(q.config_hash == 0xfeedbeefu);
    CHECK(q.seed == 77);
    CHECK(q.selector == selector);
    CHECK(q.model.kind == kind);
    CHECK(q.model.dim == p.model.dim);
    CHECK(q.standardizer.mean == p.standardizer.mean);
    CHECK(q.standardizer.sd == p.standardizer.sd);
    CHECK(q.selected == p.selected);
    for (std::size_t r = 0; r < t.rows(); ++r)
      CHECK(predict_pipeline(q, t.row(r), t.cols()) ==
            predict_pipeline(p, t.row(r), t.cols()));
    for (int i = 0; i < 10; ++i) {
      std::vector<double> row(t.cols());
      for (auto& v : row) v = probe.range(-3.0, 3.0);
      CHECK(predict_pipeline(q, row.data(), t.cols()) ==
            predict_pipeline(p, row.data(), t.cols()));
    }

    // Save -> load -> save reproduces the file byte for byte.
    const std::string path2 = path + ".again";
    save_pipeline(path2, q);
    CHECK(slurp(path) == slurp(path2));
  }
}

TEST_CASE("loaded svm parameters are identical doubles") {
  const FeatureTable t = blob_table(43);
  ClassifierParams params;
  const TrainedPipeline p = fit_final(t, ModelKind::SVM, SelectorMethod::MIM,
                                      4, params, 4, 5, 0u);
  testutil::TempDir tmp("model-io-svm");
  const std::string path = tmp.path() + "/m.optx";
  save_pipeline(path, p);
  const TrainedPipeline q = load_pipeline(path);
  const auto& a = std::get<SvmModel>(p.model.params);
  const auto& b = std::get<SvmModel>(q.model.params);
  CHECK(a.gamma == b.gamma);
  CHECK(a.bias == b.bias);
  CHECK(a.platt_a == b.platt_a);
  CHECK(a.platt_b == b.platt_b);
  CHECK(a.coef == b.coef);
  CHECK(a.support_vectors == b.support_vectors);
}

TEST_CASE("the trailing checksum uses standard reflected crc-32") {
  const FeatureTable t = blob_table(44);
  ClassifierParams params;
  const TrainedPipeline p = fit_final(t, ModelKind::BY, SelectorMethod::FSCR,
                                      2, params, 4, 1, 0u);
  testutil::TempDir tmp("model-io-crc");
  const std::string path = tmp.path() + "/m.optx";
  save_pipeline(path, p);
  const auto bytes = slurp(path);
  REQUIRE(bytes.size() > 12);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  CHECK(stored == crc32_ref(bytes.data(), bytes.size() - 4));
  // Header layout: magic, version, hash, seed.
  CHECK(std::memcmp(bytes.data(), "OPTX", 4) == 0);
}

TEST_CASE("corrupt pipeline files are rejected") {
  const FeatureTable t = blob_table(45);
  ClassifierParams params;
  const TrainedPipeline p = fit_final(t, ModelKind::DA, SelectorMethod::FSCR,
                                      2, params, 4, 1, 0u);
  testutil::TempDir tmp("model-io-bad");
  const std::string path = tmp.path() + "/m.optx";
  save_pipeline(path, p);
  const auto good = slurp(path);

  SUBCASE("flipped payload byte fails the checksum") {
    auto bad = good;
    bad[bad.size() / 2] ^= 0x40;
    spit(path, bad);
    CHECK_THROWS_AS(load_pipeline(path), Error);
  }
  SUBCASE("truncation") {
    auto bad = good;
    bad.resize(bad.size() - 9);
    spit(path, bad);
    CHECK_THROWS_AS(load_pipeline(path), Error);
  }
  SUBCASE("appended garbage moves the checksum") {
    auto bad = good;
    bad.push_back(0x00);
    spit(path, bad);
    CHECK_THROWS_AS(load_pipeline(path), Error);
  }
  SUBCASE("wrong magic") {
    auto bad = good;
    bad[0] = 'X';
    spit(path, bad);
    CHECK_THROWS_AS(load_pipeline(path), Error);
  }
  SUBCASE("unsupported version with a valid checksum") {
    auto bad = good;
    const std::uint32_t v2 = 2;
    std::memcpy(bad.data() + 4, &v2, 4);
    const std::uint32_t crc = crc32_ref(bad.data(), bad.size() - 4);
    std::memcpy(bad.data() + bad.size() - 4, &crc, 4);
    spit(path, bad);
    CHECK_THROWS_AS(load_pipeline(path), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_pipeline(tmp.path() + "/nope.optx"), Error);
  }
}

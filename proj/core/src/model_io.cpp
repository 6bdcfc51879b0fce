#include "optomx/model_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace optomx {
namespace {

constexpr char kMagic[4] = {'O', 'P', 'T', 'X'};
constexpr std::uint32_t kVersion = 1;

struct ByteWriter {
  std::vector<std::uint8_t> buf;

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i32(std::int32_t v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void f64s(const std::vector<double>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    raw(v.data(), v.size() * 8);
  }
};

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  void raw(void* p, std::size_t n) {
    if (pos + n > size)
      fail(ErrorCode::BadFormat, "model file truncated");
    std::memcpy(p, data + pos, n);
    pos += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    raw(&v, 4);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::vector<double> f64s() {
    const std::uint32_t n = u32();
    std::vector<double> v(n);
    raw(v.data(), static_cast<std::size_t>(n) * 8);
    return v;
  }
};

void write_tree(ByteWriter& w, const TreeModel& t) {
  w.u32(static_cast<std::uint32_t>(t.nodes.size()));
  for (const auto& n : t.nodes) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.f64(n.prob);
  }
}

TreeModel read_tree(ByteReader& r) {
  TreeModel t;
  const std::uint32_t count = r.u32();
  t.nodes.resize(count);
  for (auto& n : t.nodes) {
    n.feature = r.i32();
    n.threshold = r.f64();
    n.left = r.i32();
    n.right = r.i32();
    n.prob = r.f64();
  }
  return t;
}

void write_params(ByteWriter& w, const Model& m) {
  switch (m.kind) {
    case ModelKind::SVM: {
      const auto& svm = std::get<SvmModel>(m.params);
      w.f64(svm.gamma);
      w.f64(svm.bias);
      w.f64(svm.platt_a);
      w.f64(svm.platt_b);
      w.f64s(svm.coef);
      w.f64s(svm.support_vectors);
      break;
    }
    case ModelKind::KNN: {
      const auto& knn = std::get<KnnModel>(m.params);
      w.u32(static_cast<std::uint32_t>(knn.k));
      w.u32(static_cast<std::uint32_t>(knn.train_y.size()));
      w.raw(knn.train_y.data(), knn.train_y.size());
      w.f64s(knn.train_x);
      break;
    }
    case ModelKind::DT:
      write_tree(w, std::get<TreeModel>(m.params));
      break;
    case ModelKind::RF: {
      const auto& forest = std::get<ForestModel>(m.params);
      w.u32(static_cast<std::uint32_t>(forest.trees.size()));
      for (const auto& t : forest.trees) write_tree(w, t);
      break;
    }
    case ModelKind::BST: {
      const auto& boost = std::get<BoostModel>(m.params);
      w.f64s(boost.alphas);
      for (const auto& t : boost.stumps) write_tree(w, t);
      break;
    }
    case ModelKind::BY: {
      const auto& nb = std::get<BayesModel>(m.params);
      w.f64(nb.log_prior[0]);
      w.f64(nb.log_prior[1]);
      for (int c = 0; c < 2; ++c) {
        w.f64s(nb.mean[c]);
        w.f64s(nb.var[c]);
      }
      break;
    }
    case ModelKind::DA: {
      const auto& lda = std::get<LdaModel>(m.params);
      w.f64(lda.bias);
      w.f64s(lda.weights);
      break;
    }
  }
}

void read_params(ByteReader& r, Model& m) {
  switch (m.kind) {
    case ModelKind::SVM: {
      SvmModel svm;
      svm.gamma = r.f64();
      svm.bias = r.f64();
      svm.platt_a = r.f64();
      svm.platt_b = r.f64();
      svm.coef = r.f64s();
      svm.support_vectors = r.f64s();
      m.params = std::move(svm);
      break;
    }
    case ModelKind::KNN: {
      KnnModel knn;
      knn.k = static_cast<int>(r.u32());
      knn.train_y.resize(r.u32());
      r.raw(knn.train_y.data(), knn.train_y.size());
      knn.train_x = r.f64s();
      m.params = std::move(knn);
      break;
    }
    case ModelKind::DT:
      m.params = read_tree(r);
      break;
    case ModelKind::RF: {
      ForestModel forest;
      forest.trees.resize(r.u32());
      for (auto& t : forest.trees) t = read_tree(r);
      m.params = std::move(forest);
      break;
    }
    case ModelKind::BST: {
      BoostModel boost;
      boost.alphas = r.f64s();
      boost.stumps.resize(boost.alphas.size());
      for (auto& t : boost.stumps) t = read_tree(r);
      m.params = std::move(boost);
      break;
    }
    case ModelKind::BY: {
      BayesModel nb;
      nb.log_prior[0] = r.f64();
      nb.log_prior[1] = r.f64();
      for (int c = 0; c < 2; ++c) {
        nb.mean[c] = r.f64s();
        nb.var[c] = r.f64s();
      }
      m.params = std::move(nb);
      break;
    }
    case ModelKind::DA: {
      LdaModel lda;
      lda.bias = r.f64();
      lda.weights = r.f64s();
      m.params = std::move(lda);
      break;
    }
  }
}

}  // namespace

void save_pipeline(const std::string& path, const TrainedPipeline& p) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u32(p.config_hash);
  w.u64(p.seed);
  w.u8(static_cast<std::uint8_t>(p.selector));
  w.u8(static_cast<std::uint8_t>(p.model.kind));
  w.f64s(p.standardizer.mean);
  w.f64s(p.standardizer.sd);
  w.u32(static_cast<std::uint32_t>(p.selected.size()));
  for (std::size_t idx : p.selected) w.u32(static_cast<std::uint32_t>(idx));
  w.u32(static_cast<std::uint32_t>(p.model.dim));
  write_params(w, p.model);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0, w.buf.data(), static_cast<uInt>(w.buf.size())));
  w.u32(crc);

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(w.buf.data()),
            static_cast<std::streamsize>(w.buf.size()));
  if (!out) fail(ErrorCode::IoFailure, "short write to '" + path + "'");
}

TrainedPipeline load_pipeline(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::BadFormat, "'" + path + "' is not a pipeline file");
  const auto stored_crc = *reinterpret_cast<const std::uint32_t*>(
      bytes.data() + bytes.size() - 4);
  const auto computed = static_cast<std::uint32_t>(
      crc32(0, bytes.data(), static_cast<uInt>(bytes.size() - 4)));
  if (stored_crc != computed)
    fail(ErrorCode::BadFormat, "'" + path + "': CRC mismatch");

  ByteReader r{bytes.data(), bytes.size() - 4};
  r.pos = 4;
  if (r.u32() != kVersion)
    fail(ErrorCode::BadFormat, "'" + path + "': unsupported format version");
  TrainedPipeline p;
  p.config_hash = r.u32();
  p.seed = r.u64();
  p.selector = static_cast<SelectorMethod>(r.u8());
  p.model.kind = static_cast<ModelKind>(r.u8());
  p.standardizer.mean = r.f64s();
  p.standardizer.sd = r.f64s();
  p.selected.resize(r.u32());
  for (auto& idx : p.selected) idx = r.u32();
  p.model.dim = r.u32();
  read_params(r, p.model);
  if (r.pos != r.size)
    fail(ErrorCode::BadFormat, "'" + path + "': trailing bytes");
  return p;
}

}  // namespace optomx

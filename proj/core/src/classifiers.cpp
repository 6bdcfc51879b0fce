#include "optomx/classifiers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optomx/error.hpp"
#include "optomx/rng.hpp"

namespace optomx {
namespace {

void check_training_input(const MatrixView& X, const std::vector<int>& y) {
  if (X.rows != y.size() || X.rows < 2 || X.cols == 0)
    fail(ErrorCode::LengthMismatch, "train: shape mismatch");
  for (std::size_t i = 0; i < X.rows * X.cols; ++i)
    if (!std::isfinite(X.data[i]))
      fail(ErrorCode::NonFiniteInput, "train: non-finite feature value");
  bool has0 = false, has1 = false;
  for (int v : y) (v != 0 ? has1 : has0) = true;
  if (!has0 || !has1)
    fail(ErrorCode::SingleClass, "train: labels carry a single class");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// CART
// ---------------------------------------------------------------------------

struct CartBuilder {
  const MatrixView& X;
  const std::vector<int>& y;
  const std::vector<double>& w;
  int max_depth;
  int min_leaf;
  int mtry;
  Rng rng;
  std::vector<TreeNode> nodes;

  int leaf(double w1, double wt) {
    TreeNode node;
    node.prob = wt > 0.0 ? w1 / wt : 0.0;
    nodes.push_back(node);
    return static_cast<int>(nodes.size()) - 1;
  }

  std::vector<std::size_t> feature_candidates() {
    const std::size_t d = X.cols;
    if (mtry <= 0 || static_cast<std::size_t>(mtry) >= d) {
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<std::size_t> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<std::size_t> picked;
    picked.reserve(static_cast<std::size_t>(mtry));
    for (int i = 0; i < mtry; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) +
                            rng.below(d - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      picked.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(picked.begin(), picked.end());  // lower-index tie rule
    return picked;
  }

  int build(std::vector<std::size_t>& samples, int depth) {
    double wt = 0.0, w1 = 0.0;
    for (std::size_t i : samples) {
      wt += w[i];
      w1 += w[i] * (y[i] != 0);
    }
    const bool pure = w1 <= 0.0 || w1 >= wt;
    if (pure || depth >= max_depth ||
        samples.size() < 2 * static_cast<std::size_t>(min_leaf))
      return leaf(w1, wt);

    auto gini = [](double pos, double tot) {
      if (tot <= 0.0) return 0.0;
      const double p = pos / tot;
      return 1.0 - p * p - (1.0 - p) * (1.0 - p);
    };
    const double parent = gini(w1, wt);

    double best_gain = 1e-12;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    std::vector<std::size_t> order(samples);
    for (std::size_t f : feature_candidates()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X.at(a, f) < X.at(b, f);
      });
      double lt = 0.0, l1 = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        lt += w[order[i]];
        l1 += w[order[i]] * (y[order[i]] != 0);
        const double v = X.at(order[i], f), vn = X.at(order[i + 1], f);
        if (vn == v) continue;
        const std::size_t nl = i + 1, nr = order.size() - nl;
        if (nl < static_cast<std::size_t>(min_leaf) ||
            nr < static_cast<std::size_t>(min_leaf))
          continue;
        const double child = lt / wt * gini(l1, lt) +
                             (wt - lt) / wt * gini(w1 - l1, wt - lt);
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (v + vn);
        }
      }
    }
    if (best_gain <= 1e-12) return leaf(w1, wt);

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples)
      (X.at(i, best_feature) <= best_threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return leaf(w1, wt);

    TreeNode node;
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    nodes.push_back(node);
    const int self = static_cast<int>(nodes.size()) - 1;
    samples.clear();
    samples.shrink_to_fit();
    nodes[self].left = build(left, depth + 1);
    nodes[self].right = build(right, depth + 1);
    return self;
  }
};

double tree_prob(const TreeModel& t, const double* x) {
  int node = 0;
  while (t.nodes[node].feature >= 0)
    node = x[t.nodes[node].feature] <= t.nodes[node].threshold
               ? t.nodes[node].left
               : t.nodes[node].right;
  return t.nodes[node].prob;
}

// ---------------------------------------------------------------------------
// SVM: sequential minimal optimization + Platt scaling
// ---------------------------------------------------------------------------

struct Smo {
  const MatrixView& X;
  std::vector<double> ylab;  // -1 / +1
  double C;
  double gamma;
  double tol;
  std::vector<double> kernel;  // n x n
  std::vector<double> alpha;
  std::vector<double> error;  // E_i = u_i - y_i
  double b = 0.0;             // decision u = sum alpha y K - b

  static constexpr double kEps = 1e-12;

  std::size_t n() const { return ylab.size(); }
  double k(std::size_t i, std::size_t j) const { return kernel[i * n() + j]; }

  void build_kernel() {
    const std::size_t m = n();
    kernel.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      kernel[i * m + i] = 1.0;
      for (std::size_t j = i + 1; j < m; ++j) {
        double d2 = 0.0;
        const double* a = X.row(i);
        const double* c = X.row(j);
        for (std::size_t f = 0; f < X.cols; ++f) {
          const double d = a[f] - c[f];
          d2 += d * d;
        }
        const double v = std::exp(-gamma * d2);
        kernel[i * m + j] = v;
        kernel[j * m + i] = v;
      }
    }
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha[i1], a2 = alpha[i2];
    const double y1 = ylab[i1], y2 = ylab[i2];
    const double e1 = error[i1], e2 = error[i2];
    const double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (lo >= hi) return false;
    const double k11 = k(i1, i1), k12 = k(i1, i2), k22 = k(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2n;
    if (eta > 0.0) {
      a2n = a2 + y2 * (e1 - e2) / eta;
      a2n = std::clamp(a2n, lo, hi);
    } else {
      // Objective at both clip ends (Platt's negative-eta branch).
      const double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo);
      const double h1 = a1 + s * (a2 - hi);
      const double lobj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                          0.5 * lo * lo * k22 + s * lo * l1 * k12;
      const double hobj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                          0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (lobj < hobj - kEps)
        a2n = lo;
      else if (lobj > hobj + kEps)
        a2n = hi;
      else
        return false;
    }
    if (std::abs(a2n - a2) < kEps * (a2n + a2 + kEps)) return false;
    const double a1n = a1 + s * (a2 - a2n);

    const double b1 = e1 + y1 * (a1n - a1) * k11 + y2 * (a2n - a2) * k12 + b;
    const double b2 = e2 + y1 * (a1n - a1) * k12 + y2 * (a2n - a2) * k22 + b;
    double bn;
    if (a1n > 0.0 && a1n < C)
      bn = b1;
    else if (a2n > 0.0 && a2n < C)
      bn = b2;
    else
      bn = 0.5 * (b1 + b2);

    const double d1 = y1 * (a1n - a1), d2 = y2 * (a2n - a2), db = bn - b;
    for (std::size_t j = 0; j < n(); ++j)
      error[j] += d1 * k(i1, j) + d2 * k(i2, j) - db;
    alpha[i1] = a1n;
    alpha[i2] = a2n;
    b = bn;
    return true;
  }

  bool examine(std::size_t i2) {
    const double y2 = ylab[i2], a2 = alpha[i2], e2 = error[i2];
    const double r2 = e2 * y2;
    if (!((r2 < -tol && a2 < C) || (r2 > tol && a2 > 0.0))) return false;

    // Second-choice heuristic: largest |E1 - E2| among non-bound points.
    std::size_t best = n();
    double best_gap = -1.0;
    for (std::size_t j = 0; j < n(); ++j) {
      if (alpha[j] <= 0.0 || alpha[j] >= C) continue;
      const double gap = std::abs(error[j] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best < n() && take_step(best, i2)) return true;
    // Fixed starting offset replaces Platt's random start; determinism
    // matters more than the marginal convergence benefit.
    for (std::size_t off = 0; off < n(); ++off) {
      const std::size_t j = (i2 + 1 + off) % n();
      if (alpha[j] <= 0.0 || alpha[j] >= C) continue;
      if (take_step(j, i2)) return true;
    }
    for (std::size_t off = 0; off < n(); ++off) {
      const std::size_t j = (i2 + 1 + off) % n();
      if (take_step(j, i2)) return true;
    }
    return false;
  }

  void solve() {
    build_kernel();
    alpha.assign(n(), 0.0);
    error.resize(n());
    for (std::size_t i = 0; i < n(); ++i) error[i] = -ylab[i];  // u = 0
    std::size_t changed = 0;
    bool examine_all = true;
    // The pass cap is a safety net; Platt's loop terminates on its own for
    // well-posed problems.
    for (int pass = 0; pass < 1000 && (changed > 0 || examine_all); ++pass) {
      changed = 0;
      for (std::size_t i = 0; i < n(); ++i) {
        if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= C)) continue;
        changed += static_cast<std::size_t>(examine(i));
      }
      if (examine_all)
        examine_all = false;
      else if (changed == 0)
        examine_all = true;
    }
  }
};

// Sigmoid fit on training decision values (Lin-Weng regularized targets,
// Newton iterations with backtracking).
void fit_platt(const std::vector<double>& f, const std::vector<int>& y,
               double& A, double& B) {
  const std::size_t n = f.size();
  double prior1 = 0.0;
  for (int v : y) prior1 += static_cast<double>(v != 0);
  const double prior0 = static_cast<double>(n) - prior1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = y[i] != 0 ? hi : lo;

  A = 0.0;
  B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double a, double b) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * a + b;
      if (z >= 0.0)
        obj += t[i] * z + std::log1p(std::exp(-z));
      else
        obj += (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return obj;
  };
  double fval = objective(A, B);
  const double sigma = 1e-12;
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * A + B;
      const double p = sigmoid(-z);  // 1 / (1 + exp(z))
      const double q = 1.0 - p;
      const double d1 = t[i] - p;
      const double d2 = p * q;
      g1 += f[i] * d1;
      g2 += d1;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = A + step * da, nb = B + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        A = na;
        B = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < 1e-10) break;  // line search failed; accept current point
  }
}

Model train_svm(const MatrixView& X, const std::vector<int>& y,
                const ClassifierParams& p) {
  Smo smo{X,
          {},
          p.svm_c,
          p.svm_gamma > 0.0 ? p.svm_gamma : 1.0 / static_cast<double>(X.cols),
          p.svm_tol,
          {},
          {},
          {},
          0.0};
  smo.ylab.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) smo.ylab[i] = y[i] != 0 ? 1.0 : -1.0;
  smo.solve();

  SvmModel svm;
  svm.gamma = smo.gamma;
  svm.bias = -smo.b;
  for (std::size_t i = 0; i < smo.n(); ++i) {
    if (smo.alpha[i] <= Smo::kEps) continue;
    svm.coef.push_back(smo.alpha[i] * smo.ylab[i]);
    const double* row = X.row(i);
    svm.support_vectors.insert(svm.support_vectors.end(), row, row + X.cols);
  }
  std::vector<double> decision(smo.n());
  for (std::size_t i = 0; i < smo.n(); ++i)
    decision[i] = smo.error[i] + smo.ylab[i];  // u_i
  fit_platt(decision, y, svm.platt_a, svm.platt_b);

  Model m;
  m.kind = ModelKind::SVM;
  m.dim = X.cols;
  m.params = std::move(svm);
  return m;
}

// ---------------------------------------------------------------------------
// remaining families
// ---------------------------------------------------------------------------

Model train_knn(const MatrixView& X, const std::vector<int>& y,
                const ClassifierParams& p) {
  KnnModel knn;
  knn.k = p.knn_k;
  knn.train_x.assign(X.data, X.data + X.rows * X.cols);
  knn.train_y.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) knn.train_y[i] = y[i] != 0;
  Model m;
  m.kind = ModelKind::KNN;
  m.dim = X.cols;
  m.params = std::move(knn);
  return m;
}

Model train_dt(const MatrixView& X, const std::vector<int>& y,
               const ClassifierParams& p) {
  std::vector<double> w(X.rows, 1.0);
  std::vector<std::size_t> idx(X.rows);
  std::iota(idx.begin(), idx.end(), 0);
  Model m;
  m.kind = ModelKind::DT;
  m.dim = X.cols;
  m.params = build_cart(X, y, w, idx, p.tree_max_depth, p.tree_min_leaf, 0, 0);
  return m;
}

Model train_rf(const MatrixView& X, const std::vector<int>& y,
               const ClassifierParams& p, std::uint64_t seed) {
  const int mtry = p.rf_mtry > 0
                       ? p.rf_mtry
                       : std::max(1, static_cast<int>(std::lround(
                                         std::sqrt(static_cast<double>(X.cols)))));
  std::vector<double> w(X.rows, 1.0);
  ForestModel forest;
  forest.trees.reserve(static_cast<std::size_t>(p.rf_trees));
  for (int t = 0; t < p.rf_trees; ++t) {
    Rng rng = Rng(seed).stream("rf-tree").stream(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> idx(X.rows);
    if (p.rf_bootstrap) {
      for (auto& i : idx) i = rng.below(X.rows);
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    forest.trees.push_back(build_cart(X, y, w, idx, p.tree_max_depth,
                                      p.tree_min_leaf, mtry, rng.next_u64()));
  }
  Model m;
  m.kind = ModelKind::RF;
  m.dim = X.cols;
  m.params = std::move(forest);
  return m;
}

Model train_bst(const MatrixView& X, const std::vector<int>& y,
                const ClassifierParams& p) {
  const std::size_t n = X.rows;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  BoostModel boost;
  for (int round = 0; round < p.bst_rounds; ++round) {
    TreeModel stump = build_cart(X, y, w, idx, 1, 1, 0, 0);
    double err = 0.0;
    std::vector<char> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = tree_prob(stump, X.row(i)) >= 0.5;
      if (h[i] != (y[i] != 0)) err += w[i];
    }
    if (err >= 0.5) {
      if (boost.stumps.empty()) {
        boost.alphas.push_back(0.0);
        boost.stumps.push_back(std::move(stump));
      }
      break;
    }
    const double floored = std::max(err, 1e-12);
    const double alpha = 0.5 * std::log((1.0 - floored) / floored);
    boost.alphas.push_back(alpha);
    boost.stumps.push_back(std::move(stump));
    if (err < 1e-12) break;  // perfect stump; later rounds cannot move weights
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(h[i] != (y[i] != 0) ? alpha : -alpha);
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }
  Model m;
  m.kind = ModelKind::BST;
  m.dim = X.cols;
  m.params = std::move(boost);
  return m;
}

Model train_bayes(const MatrixView& X, const std::vector<int>& y,
                  const ClassifierParams& p) {
  BayesModel nb;
  double count[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    nb.mean[c].assign(X.cols, 0.0);
    nb.var[c].assign(X.cols, 0.0);
  }
  for (std::size_t i = 0; i < X.rows; ++i) {
    const int c = y[i] != 0;
    count[c] += 1.0;
    for (std::size_t f = 0; f < X.cols; ++f) nb.mean[c][f] += X.at(i, f);
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : nb.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < X.rows; ++i) {
    const int c = y[i] != 0;
    for (std::size_t f = 0; f < X.cols; ++f) {
      const double d = X.at(i, f) - nb.mean[c][f];
      nb.var[c][f] += d * d;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : nb.var[c]) v = std::max(v / count[c], p.nb_var_floor);
    nb.log_prior[c] = std::log(count[c] / static_cast<double>(X.rows));
  }
  Model m;
  m.kind = ModelKind::BY;
  m.dim = X.cols;
  m.params = std::move(nb);
  return m;
}

Model train_lda(const MatrixView& X, const std::vector<int>& y,
                const ClassifierParams& p) {
  const auto d = static_cast<Eigen::Index>(X.cols);
  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  double count[2] = {0, 0};
  for (std::size_t i = 0; i < X.rows; ++i) {
    const int c = y[i] != 0;
    count[c] += 1.0;
    for (Eigen::Index f = 0; f < d; ++f) mu[c][f] += X.at(i, f);
  }
  for (int c = 0; c < 2; ++c) mu[c] /= count[c];
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd diff(d);
  for (std::size_t i = 0; i < X.rows; ++i) {
    const int c = y[i] != 0;
    for (Eigen::Index f = 0; f < d; ++f) diff[f] = X.at(i, f) - mu[c][f];
    cov.noalias() += diff * diff.transpose();
  }
  cov /= std::max(static_cast<double>(X.rows) - 2.0, 1.0);
  cov.diagonal().array() += p.lda_ridge;

  const Eigen::VectorXd wvec = cov.ldlt().solve(mu[1] - mu[0]);
  if (!wvec.allFinite())
    fail(ErrorCode::SingularSystem, "LDA: pooled covariance solve failed");
  LdaModel lda;
  lda.weights.assign(wvec.data(), wvec.data() + d);
  lda.bias = -0.5 * (mu[0] + mu[1]).dot(wvec) + std::log(count[1] / count[0]);
  Model m;
  m.kind = ModelKind::DA;
  m.dim = X.cols;
  m.params = std::move(lda);
  return m;
}

}  // namespace

Standardizer fit_standardizer(const MatrixView& X) {
  if (X.rows < 2 || X.cols == 0)
    fail(ErrorCode::LengthMismatch, "fit_standardizer: need >= 2 rows");
  Standardizer s;
  s.mean.assign(X.cols, 0.0);
  s.sd.assign(X.cols, 0.0);
  const double n = static_cast<double>(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r)
    for (std::size_t c = 0; c < X.cols; ++c) s.mean[c] += X.at(r, c);
  for (auto& v : s.mean) v /= n;
  for (std::size_t r = 0; r < X.rows; ++r)
    for (std::size_t c = 0; c < X.cols; ++c) {
      const double d = X.at(r, c) - s.mean[c];
      s.sd[c] += d * d;
    }
  for (auto& v : s.sd) v = std::sqrt(v / n);  // population SD
  // A column whose values are all identical is flagged with sd = 0 even
  // when mean rounding leaves sum-of-squares residue; otherwise the
  // residue would be rescaled into unit-variance noise.
  for (std::size_t c = 0; c < X.cols; ++c) {
    bool constant = true;
    for (std::size_t r = 1; r < X.rows && constant; ++r)
      constant = X.at(r, c) == X.at(0, c);
    if (constant) s.sd[c] = 0.0;
  }
  return s;
}

void apply_standardizer(const Standardizer& s, const double* in, double* out) {
  for (std::size_t c = 0; c < s.mean.size(); ++c)
    out[c] = s.sd[c] > 0.0 ? (in[c] - s.mean[c]) / s.sd[c] : 0.0;
}

std::vector<double> apply_standardizer(const Standardizer& s,
                                       const MatrixView& X) {
  if (X.cols != s.mean.size())
    fail(ErrorCode::DimensionMismatch, "apply_standardizer: column mismatch");
  std::vector<double> out(X.rows * X.cols);
  for (std::size_t r = 0; r < X.rows; ++r)
    apply_standardizer(s, X.row(r), out.data() + r * X.cols);
  return out;
}

const std::vector<ModelKind>& all_classifiers() {
  static const std::vector<ModelKind> all = {
      ModelKind::RF, ModelKind::KNN, ModelKind::DT, ModelKind::SVM,
      ModelKind::BST, ModelKind::BY, ModelKind::DA};
  return all;
}

std::string classifier_name(ModelKind k) {
  switch (k) {
    case ModelKind::SVM: return "SVM";
    case ModelKind::RF: return "RF";
    case ModelKind::KNN: return "KNN";
    case ModelKind::DT: return "DT";
    case ModelKind::BST: return "BST";
    case ModelKind::BY: return "BY";
    case ModelKind::DA: return "DA";
  }
  fail(ErrorCode::BadConfig, "unknown classifier kind");
}

ModelKind classifier_from_name(const std::string& name) {
  for (ModelKind k : all_classifiers())
    if (classifier_name(k) == name) return k;
  fail(ErrorCode::BadConfig, "unknown classifier '" + name + "'");
}

TreeModel build_cart(const MatrixView& X, const std::vector<int>& y,
                     const std::vector<double>& weights,
                     const std::vector<std::size_t>& sample_idx, int max_depth,
                     int min_leaf, int mtry, std::uint64_t rng_seed) {
  CartBuilder builder{X, y, weights, max_depth, min_leaf, mtry, Rng(rng_seed),
                      {}};
  std::vector<std::size_t> samples(sample_idx);
  builder.build(samples, 0);
  TreeModel t;
  t.nodes = std::move(builder.nodes);
  return t;
}

Model train(ModelKind kind, const MatrixView& X, const std::vector<int>& y,
            const ClassifierParams& params, std::uint64_t seed) {
  check_training_input(X, y);
  switch (kind) {
    case ModelKind::SVM: return train_svm(X, y, params);
    case ModelKind::KNN: return train_knn(X, y, params);
    case ModelKind::DT: return train_dt(X, y, params);
    case ModelKind::RF: return train_rf(X, y, params, seed);
    case ModelKind::BST: return train_bst(X, y, params);
    case ModelKind::BY: return train_bayes(X, y, params);
    case ModelKind::DA: return train_lda(X, y, params);
  }
  fail(ErrorCode::BadConfig, "unknown classifier kind");
}

double svm_decision(const SvmModel& svm, std::size_t dim, const double* x) {
  double u = svm.bias;
  const std::size_t n_sv = svm.coef.size();
  for (std::size_t i = 0; i < n_sv; ++i) {
    const double* sv = svm.support_vectors.data() + i * dim;
    double d2 = 0.0;
    for (std::size_t f = 0; f < dim; ++f) {
      const double d = sv[f] - x[f];
      d2 += d * d;
    }
    u += svm.coef[i] * std::exp(-svm.gamma * d2);
  }
  return u;
}

double predict_proba(const Model& m, const double* x) {
  switch (m.kind) {
    case ModelKind::SVM: {
      const auto& svm = std::get<SvmModel>(m.params);
      const double u = svm_decision(svm, m.dim, x);
      return sigmoid(-(svm.platt_a * u + svm.platt_b));
    }
    case ModelKind::KNN: {
      const auto& knn = std::get<KnnModel>(m.params);
      const std::size_t n = knn.train_y.size();
      std::vector<std::pair<double, std::size_t>> dist(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = knn.train_x.data() + i * m.dim;
        double d2 = 0.0;
        for (std::size_t f = 0; f < m.dim; ++f) {
          const double d = row[f] - x[f];
          d2 += d * d;
        }
        dist[i] = {d2, i};
      }
      std::sort(dist.begin(), dist.end());
      const std::size_t k = std::min<std::size_t>(knn.k, n);
      double votes = 0.0;
      for (std::size_t i = 0; i < k; ++i) votes += knn.train_y[dist[i].second];
      return votes / static_cast<double>(k);
    }
    case ModelKind::DT:
      return tree_prob(std::get<TreeModel>(m.params), x);
    case ModelKind::RF: {
      const auto& forest = std::get<ForestModel>(m.params);
      double votes = 0.0;
      for (const auto& t : forest.trees)
        votes += tree_prob(t, x) >= 0.5 ? 1.0 : 0.0;
      return votes / static_cast<double>(forest.trees.size());
    }
    case ModelKind::BST: {
      const auto& boost = std::get<BoostModel>(m.params);
      double num = 0.0, den = 0.0;
      for (std::size_t t = 0; t < boost.stumps.size(); ++t) {
        den += boost.alphas[t];
        if (tree_prob(boost.stumps[t], x) >= 0.5) num += boost.alphas[t];
      }
      return den > 0.0 ? num / den : 0.5;
    }
    case ModelKind::BY: {
      const auto& nb = std::get<BayesModel>(m.params);
      double logp[2];
      for (int c = 0; c < 2; ++c) {
        logp[c] = nb.log_prior[c];
        for (std::size_t f = 0; f < m.dim; ++f) {
          const double v = nb.var[c][f];
          const double d = x[f] - nb.mean[c][f];
          logp[c] += -0.5 * std::log(6.283185307179586 * v) - d * d / (2.0 * v);
        }
      }
      return sigmoid(logp[1] - logp[0]);
    }
    case ModelKind::DA: {
      const auto& lda = std::get<LdaModel>(m.params);
      double z = lda.bias;
      for (std::size_t f = 0; f < m.dim; ++f) z += lda.weights[f] * x[f];
      return sigmoid(z);
    }
  }
  fail(ErrorCode::BadConfig, "unknown classifier kind");
}

double predict_proba(const Model& m, const std::vector<double>& x) {
  if (x.size() != m.dim)
    fail(ErrorCode::DimensionMismatch,
         "predict_proba: expected " + std::to_string(m.dim) + " features, got " +
             std::to_string(x.size()));
  return predict_proba(m, x.data());
}

}  // namespace optomx

#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "helpers.hpp"
#include "optomx/features.hpp"

using namespace optomx;
using testutil::TestRand;

namespace {

std::vector<std::vector<double>> counts_oracle(const DiscretePatch& dp, int dr,
                                               int dc) {
  const int ng = dp.num_levels;
  std::vector<std::vector<double>> m(ng, std::vector<double>(ng, 0.0));
  // Ordered pairs in both the offset and its opposite; equivalent to the
  // symmetric accumulation but enumerated differently.
  for (int sign : {+1, -1})
    for (int r = 0; r < dp.height; ++r)
      for (int c = 0; c < dp.width; ++c) {
        const int r2 = r + sign * dr, c2 = c + sign * dc;
        if (r2 < 0 || r2 >= dp.height || c2 < 0 || c2 >= dp.width) continue;
        m[dp.at(r, c) - 1][dp.at(r2, c2) - 1] += 1.0;
      }
  return m;
}

// Full 23-feature recomputation from the textbook formulas on one
// normalized co-occurrence matrix.
std::map<std::string, double> features_oracle(
    const std::vector<std::vector<double>>& counts) {
  const int ng = static_cast<int>(counts.size());
  double total = 0.0;
  for (const auto& row : counts)
    for (double v : row) total += v;
  std::vector<std::vector<double>> p(ng, std::vector<double>(ng, 0.0));
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) p[i][j] = counts[i][j] / total;

  std::vector<double> px(ng, 0.0);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) px[i] += p[i][j];
  double mu = 0.0;
  for (int i = 0; i < ng; ++i) mu += (i + 1.0) * px[i];
  double var = 0.0;
  for (int i = 0; i < ng; ++i) var += (i + 1.0 - mu) * (i + 1.0 - mu) * px[i];

  std::map<std::string, double> f;
  auto& F = f;
  F["JointAverage"] = mu;
  double ac = 0, cp = 0, cs = 0, ct = 0, con = 0, je = 0, jent = 0, idm = 0,
         idmn = 0, id = 0, idn = 0, mp = 0, ss = 0, hxy1 = 0;
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      const double pij = p[i][j];
      const double gi = i + 1.0, gj = j + 1.0;
      ac += gi * gj * pij;
      const double dev = gi + gj - 2.0 * mu;
      cp += dev * dev * dev * dev * pij;
      cs += dev * dev * dev * pij;
      ct += dev * dev * pij;
      con += (gi - gj) * (gi - gj) * pij;
      je += pij * pij;
      idm += pij / (1.0 + (gi - gj) * (gi - gj));
      idmn += pij / (1.0 + (gi - gj) * (gi - gj) / (double(ng) * ng));
      id += pij / (1.0 + std::abs(gi - gj));
      idn += pij / (1.0 + std::abs(gi - gj) / ng);
      mp = std::max(mp, pij);
      ss += (gi - mu) * (gi - mu) * pij;
      if (pij > 0) {
        jent -= pij * std::log2(pij);
        hxy1 -= pij * std::log2(px[i] * px[j]);
      }
    }
  F["Autocorrelation"] = ac;
  F["ClusterProminence"] = cp;
  F["ClusterShade"] = cs;
  F["ClusterTendency"] = ct;
  F["Contrast"] = con;
  F["JointEnergy"] = je;
  F["JointEntropy"] = jent;
  F["Idm"] = idm;
  F["Idmn"] = idmn;
  F["Id"] = id;
  F["Idn"] = idn;
  F["MaximumProbability"] = mp;
  F["SumSquares"] = ss;
  F["Correlation"] = var > 0 ? (ac - mu * mu) / var : 1.0;

  std::vector<double> pdiff(ng, 0.0), psum(2 * ng + 1, 0.0);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      pdiff[std::abs(i - j)] += p[i][j];
      psum[i + j + 2] += p[i][j];
    }
  double da = 0, de = 0;
  for (int k = 0; k < ng; ++k) {
    da += k * pdiff[k];
    if (pdiff[k] > 0) de -= pdiff[k] * std::log2(pdiff[k]);
  }
  double dv = 0;
  for (int k = 0; k < ng; ++k) dv += (k - da) * (k - da) * pdiff[k];
  F["DifferenceAverage"] = da;
  F["DifferenceEntropy"] = de;
  F["DifferenceVariance"] = dv;
  double se = 0;
  for (double q : psum)
    if (q > 0) se -= q * std::log2(q);
  F["SumEntropy"] = se;
  double iv = 0;
  for (int k = 1; k < ng; ++k) iv += pdiff[k] / (double(k) * k);
  F["InverseVariance"] = iv;

  double hx = 0;
  for (double q : px)
    if (q > 0) hx -= q * std::log2(q);
  double hxy2 = 0;
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j)
      if (px[i] * px[j] > 0) hxy2 -= px[i] * px[j] * std::log2(px[i] * px[j]);
  F["Imc1"] = hx > 0 ? (jent - hxy1) / hx : 0.0;
  const double arg = 1.0 - std::exp(-2.0 * (hxy2 - jent));
  F["Imc2"] = arg > 0 ? std::sqrt(arg) : 0.0;

  // MCC from the classical nonsymmetric Q matrix; its eigenvalues are the
  // squared eigenvalues of the symmetric similarity form.
  std::vector<int> present;
  for (int i = 0; i < ng; ++i)
    if (px[i] > 0) present.push_back(i);
  if (present.size() <= 1) {
    F["MCC"] = 1.0;
  } else {
    const int m = static_cast<int>(present.size());
    Eigen::MatrixXd Q(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k)
          acc += p[present[a]][present[k]] * p[present[b]][present[k]] /
                 (px[present[a]] * px[present[k]]);
        Q(a, b) = acc;
      }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Q);
    std::vector<double> ev(m);
    for (int a = 0; a < m; ++a) ev[a] = solver.eigenvalues()[a].real();
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    F["MCC"] = std::sqrt(std::max(ev[1], 0.0));
  }
  return f;
}

std::map<std::string, double> averaged_oracle(const DiscretePatch& dp) {
  std::map<std::string, double> avg;
  for (const auto& d : kDirections2D) {
    const auto one = features_oracle(counts_oracle(dp, d[0], d[1]));
    for (const auto& [k, v] : one) avg[k] += 0.25 * v;
  }
  return avg;
}

}  // namespace

TEST_CASE("co-occurrence counts match brute-force pair enumeration") {
  TestRand rnd(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int side = 4 + static_cast<int>(rnd.below(8));
    const int ng = 2 + static_cast<int>(rnd.below(7));
    const DiscretePatch dp = testutil::random_levels(rnd, side, ng);
    for (const auto& d : kDirections2D) {
      const TextureMatrix got = glcm_matrix(dp, d[0], d[1]);
      const auto want = counts_oracle(dp, d[0], d[1]);
      REQUIRE(got.rows == ng);
      REQUIRE(got.cols == ng);
      double total = 0.0;
      for (int i = 0; i < ng; ++i)
        for (int j = 0; j < ng; ++j) {
          CHECK(got.at(i, j) == want[i][j]);
          CHECK(got.at(i, j) == got.at(j, i));
          total += got.at(i, j);
        }
      CHECK(got.sum() == total);
    }
  }
}

TEST_CASE("hand-checked two-level matrix") {
  DiscretePatch dp;
  dp.width = dp.height = 2;
  dp.num_levels = 2;
  dp.levels = {1, 2, 1, 2};
  const TextureMatrix row = glcm_matrix(dp, 0, 1);
  CHECK(row.at(0, 0) == 0.0);
  CHECK(row.at(0, 1) == 2.0);
  CHECK(row.at(1, 0) == 2.0);
  CHECK(row.at(1, 1) == 0.0);
  const TextureMatrix col = glcm_matrix(dp, 1, 0);
  CHECK(col.at(0, 0) == 2.0);
  CHECK(col.at(1, 1) == 2.0);
  CHECK(col.at(0, 1) == 0.0);

  const auto feats = glcm_features(dp);
  const auto& names = glcm_names();
  auto at = [&](const std::string& n) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return feats[i];
    REQUIRE(false);
    return 0.0;
  };
  // Directions: row/diag/anti-diag are perfectly anti-correlated, the
  // column direction perfectly correlated.
  CHECK(at("Contrast") == doctest::Approx(0.75));
  CHECK(at("Correlation") == doctest::Approx(-0.5));
  CHECK(at("JointAverage") == doctest::Approx(1.5));
}

TEST_CASE("all 23 features agree with the independent recomputation") {
  TestRand rnd(42);
  const auto& names = glcm_names();
  REQUIRE(names.size() == kGlcmCount);
  for (int trial = 0; trial < 40; ++trial) {
    const int side = 4 + static_cast<int>(rnd.below(9));
    const int ng = 2 + static_cast<int>(rnd.below(7));
    const DiscretePatch dp = testutil::random_levels(rnd, side, ng);
    const auto got = glcm_features(dp);
    const auto want = averaged_oracle(dp);
    REQUIRE(got.size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      INFO("feature ", names[i], " trial ", trial);
      CHECK(got[i] == doctest::Approx(want.at(names[i])).epsilon(1e-9));
    }
  }
}

TEST_CASE("single-level patches resolve to the degenerate conventions") {
  DiscretePatch dp;
  dp.width = dp.height = 5;
  dp.num_levels = 6;
  dp.levels.assign(25, 3);
  const auto feats = glcm_features(dp);
  const auto& names = glcm_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(std::isfinite(feats[i]));
    if (names[i] == "Correlation" || names[i] == "MCC")
      CHECK(feats[i] == 1.0);
    if (names[i] == "Imc1" || names[i] == "Imc2") CHECK(feats[i] == 0.0);
    if (names[i] == "Contrast" || names[i] == "JointEntropy")
      CHECK(feats[i] == 0.0);
    if (names[i] == "JointEnergy" || names[i] == "MaximumProbability")
      CHECK(feats[i] == 1.0);
  }
}

TEST_CASE("feature vectors never contain non-finite values") {
  TestRand rnd(4242);
  for (int trial = 0; trial < 25; ++trial) {
    const int ng = 2 + static_cast<int>(rnd.below(31));
    const DiscretePatch dp = testutil::random_levels(rnd, 4, ng);
    for (double v : glcm_features(dp)) CHECK(std::isfinite(v));
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "optomx/selection.hpp"

using namespace optomx;
using testutil::TempDir;
using testutil::TestRand;

namespace {

struct Problem {
  std::vector<double> values;  // rows x cols
  std::vector<int> y;
  std::size_t rows = 0, cols = 0;
  MatrixView view() const { return view_of(values, rows, cols); }
  std::vector<double> col(std::size_t f) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = values[r * cols + f];
    return out;
  }
};

Problem make_problem(TestRand& rnd, std::size_t rows, std::size_t cols) {
  Problem p;
  p.rows = rows;
  p.cols = cols;
  p.values.resize(rows * cols);
  p.y.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double latent = rnd.normal();
    p.y[r] = latent > 0.0 ? 1 : 0;
    for (std::size_t f = 0; f < cols; ++f) {
      // Feature f mixes the latent class signal with noise at varying SNR.
      const double w = static_cast<double>(f % 5) / 4.0;
      p.values[r * cols + f] = w * latent + (1.0 - w) * rnd.normal();
    }
  }
  // Guarantee both classes appear at least twice.
  p.y[0] = 0;
  p.y[1] = 0;
  p.y[2] = 1;
  p.y[3] = 1;
  return p;
}

double entropy_of(const std::vector<int>& codes, int n_codes) {
  std::vector<double> counts(n_codes, 0.0);
  for (int c : codes) counts[c] += 1.0;
  const double n = static_cast<double>(codes.size());
  double h = 0.0;
  for (double cnt : counts)
    if (cnt > 0.0) h -= cnt / n * std::log2(cnt / n);
  return h;
}

// MI through the entropy identity rather than the plug-in cell sum.
double mi_oracle(const std::vector<int>& a, int na, const std::vector<int>& b,
                 int nb) {
  std::vector<int> joint(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) joint[i] = a[i] * nb + b[i];
  return entropy_of(a, na) + entropy_of(b, nb) -
         entropy_of(joint, na * nb);
}

std::vector<int> ybits_of(const std::vector<int>& y) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] != 0;
  return out;
}

double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  if (vx <= 0 || vy <= 0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

std::vector<double> midranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t)
      r[idx[t]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

}  // namespace

TEST_CASE("equal-frequency binning matches its cut-point definition") {
  TestRand rnd(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rnd.below(60);
    const int bins = 2 + rnd.below(7);
    std::vector<double> x(n);
    for (auto& v : x) v = rnd.below(12) * 0.5;  // plenty of ties
    const auto got = discretize_equal_frequency(x.data(), n, bins);
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (int b = 1; b < bins; ++b)
      cuts.push_back(sorted[static_cast<std::size_t>(b) * n / bins]);
    for (std::size_t i = 0; i < n; ++i) {
      // A value equal to a cut point lands above it.
      int expect = 0;
      for (double cut : cuts) expect += x[i] >= cut ? 1 : 0;
      CHECK(got[i] == expect);
      CHECK(got[i] >= 0);
      CHECK(got[i] < bins);
    }
    // Equal values share a bin.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (x[i] == x[j]) CHECK(got[i] == got[j]);
  }
  std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(discretize_equal_frequency(x.data(), 2, 1), Error);
}

TEST_CASE("mutual information agrees with the entropy identity") {
  TestRand rnd(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 40 + rnd.below(80);
    std::vector<double> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rnd.below(2);
      x[i] = y[i] + rnd.normal();
    }
    y[0] = 0;
    y[1] = 1;
    const int bins = 8;
    const double got = mutual_information(x, y, bins);
    const auto disc = discretize_equal_frequency(x.data(), n, bins);
    const double want = mi_oracle(disc, bins, ybits_of(y), 2);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    CHECK(got >= 0.0);
  }
  // A perfectly separating feature carries the full label entropy.
  std::vector<double> x = {0, 0, 0, 0, 1, 1, 1, 1};
  std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  CHECK(mutual_information(x, y, 2) == doctest::Approx(1.0));
  std::vector<int> single(8, 1);
  CHECK_THROWS_AS(mutual_information(x, single, 2), Error);
}

TEST_CASE("fisher, chi-square, gini, correlation scores match oracles") {
  TestRand rnd(3);
  const Problem p = make_problem(rnd, 60, 12);
  const auto ybits = ybits_of(p.y);
  std::vector<double> ylin(ybits.begin(), ybits.end());

  const auto fscr = rank_features(p.view(), p.y, SelectorMethod::FSCR);
  const auto chsq = rank_features(p.view(), p.y, SelectorMethod::CHSQ, 8);
  const auto gini = rank_features(p.view(), p.y, SelectorMethod::GINI);
  const auto mim = rank_features(p.view(), p.y, SelectorMethod::MIM, 8);
  const auto srcc = rank_features(p.view(), p.y, SelectorMethod::SRCC);
  const auto prcc = rank_features(p.view(), p.y, SelectorMethod::PRCC);

  for (std::size_t f = 0; f < p.cols; ++f) {
    const auto x = p.col(f);

    // Fisher: between-class over summed within-class scatter.
    double n0 = 0, n1 = 0, m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (ybits[i]) {
        n1 += 1;
        m1 += x[i];
      } else {
        n0 += 1;
        m0 += x[i];
      }
    }
    const double mu = (m0 + m1) / static_cast<double>(x.size());
    m0 /= n0;
    m1 /= n1;
    double v0 = 0, v1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - (ybits[i] ? m1 : m0);
      (ybits[i] ? v1 : v0) += d * d;
    }
    const double fisher_want =
        (n0 * (m0 - mu) * (m0 - mu) + n1 * (m1 - mu) * (m1 - mu)) / (v0 + v1);

    // Chi-square on the 8-bin table.
    const auto disc = discretize_equal_frequency(x.data(), x.size(), 8);
    double table[8][2] = {};
    double rowsum[8] = {}, colsum[2] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
      table[disc[i]][ybits[i]] += 1;
      rowsum[disc[i]] += 1;
      colsum[ybits[i]] += 1;
    }
    double chi_want = 0;
    for (int b = 0; b < 8; ++b)
      for (int c = 0; c < 2; ++c) {
        const double e = rowsum[b] * colsum[c] / static_cast<double>(x.size());
        if (e > 0) chi_want += (table[b][c] - e) * (table[b][c] - e) / e;
      }

    // Best single-threshold Gini gain by exhaustive scan.
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    auto gini_imp = [](double pos, double cnt) {
      if (cnt <= 0) return 0.0;
      const double q = pos / cnt;
      return 1.0 - q * q - (1 - q) * (1 - q);
    };
    const double nd = static_cast<double>(x.size());
    double total1 = 0;
    for (int b : ybits) total1 += b;
    const double parent = gini_imp(total1, nd);
    double gini_want = 0, left1 = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      left1 += ybits[idx[i]];
      if (x[idx[i + 1]] == x[idx[i]]) continue;
      const double nl = static_cast<double>(i + 1);
      const double child = nl / nd * gini_imp(left1, nl) +
                           (nd - nl) / nd * gini_imp(total1 - left1, nd - nl);
      gini_want = std::max(gini_want, parent - child);
    }

    const double mim_want = mi_oracle(disc, 8, ybits, 2);
    const double srcc_want =
        std::abs(pearson_oracle(midranks(x), midranks(ylin)));
    const double prcc_want = std::abs(pearson_oracle(x, ylin));

    auto score_of = [&](const FeatureRanking& r) {
      for (std::size_t i = 0; i < r.order.size(); ++i)
        if (r.order[i] == f) return r.scores[i];
      REQUIRE(false);
      return 0.0;
    };
    CHECK(score_of(fscr) == doctest::Approx(fisher_want).epsilon(1e-10));
    CHECK(score_of(chsq) == doctest::Approx(chi_want).epsilon(1e-10));
    CHECK(score_of(gini) == doctest::Approx(gini_want).epsilon(1e-12));
    CHECK(score_of(mim) == doctest::Approx(mim_want).epsilon(1e-10));
    CHECK(score_of(srcc) == doctest::Approx(srcc_want).epsilon(1e-10));
    CHECK(score_of(prcc) == doctest::Approx(prcc_want).epsilon(1e-10));
  }
}

TEST_CASE("rank correlation is invariant to monotone transforms") {
  TestRand rnd(4);
  Problem p = make_problem(rnd, 50, 4);
  const auto base = rank_features(p.view(), p.y, SelectorMethod::SRCC);
  Problem q = p;
  for (auto& v : q.values) v = std::exp(v);
  const auto warped = rank_features(q.view(), q.y, SelectorMethod::SRCC);
  CHECK(base.order == warped.order);
  for (std::size_t i = 0; i < base.scores.size(); ++i)
    CHECK(base.scores[i] == doctest::Approx(warped.scores[i]).epsilon(1e-12));
  // Pearson is invariant to affine maps only.
  const auto pr = rank_features(p.view(), p.y, SelectorMethod::PRCC);
  Problem affine = p;
  for (auto& v : affine.values) v = -3.0 * v + 7.0;
  const auto pr2 = rank_features(affine.view(), affine.y, SelectorMethod::PRCC);
  for (std::size_t i = 0; i < pr.scores.size(); ++i)
    CHECK(pr.scores[i] == doctest::Approx(pr2.scores[i]).epsilon(1e-12));
}

TEST_CASE("greedy mrmr reproduces a step-by-step reimplementation") {
  TestRand rnd(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Problem p = make_problem(rnd, 48, 10);
    const int bins = 8;
    const auto got = rank_features(p.view(), p.y, SelectorMethod::MRMR, bins);

    const auto ybits = ybits_of(p.y);
    std::vector<std::vector<int>> disc(p.cols);
    std::vector<double> rel(p.cols);
    for (std::size_t f = 0; f < p.cols; ++f) {
      const auto x = p.col(f);
      disc[f] = discretize_equal_frequency(x.data(), x.size(), bins);
      rel[f] = mi_oracle(disc[f], bins, ybits, 2);
    }
    std::vector<std::size_t> chosen;
    std::vector<char> used(p.cols, 0);
    while (chosen.size() < p.cols) {
      std::size_t best = p.cols;
      double best_score = 0.0;
      for (std::size_t f = 0; f < p.cols; ++f) {
        if (used[f]) continue;
        double red = 0.0;
        for (std::size_t g : chosen) red += mi_oracle(disc[f], bins, disc[g], bins);
        const double score =
            chosen.empty() ? rel[f]
                           : rel[f] - red / static_cast<double>(chosen.size());
        if (best == p.cols || score > best_score) {
          best = f;
          best_score = score;
        }
      }
      used[best] = 1;
      chosen.push_back(best);
    }
    CHECK(got.order == chosen);
  }
}

TEST_CASE("a bounded greedy horizon falls back to relevance order") {
  TestRand rnd(6);
  const Problem p = make_problem(rnd, 48, 12);
  const int bins = 8;
  const std::size_t limit = 4;
  const auto full = rank_features(p.view(), p.y, SelectorMethod::MRMR, bins);
  const auto capped = rank_features(p.view(), p.y, SelectorMethod::MRMR, bins, limit);
  for (std::size_t i = 0; i < limit; ++i) CHECK(capped.order[i] == full.order[i]);
  // Tail ordered by the MIM relevance scores.
  const auto mim = rank_features(p.view(), p.y, SelectorMethod::MIM, bins);
  std::vector<std::size_t> tail(capped.order.begin() + limit, capped.order.end());
  std::vector<std::size_t> expect;
  for (std::size_t f : mim.order)
    if (std::find(capped.order.begin(), capped.order.begin() + limit, f) ==
        capped.order.begin() + limit)
      expect.push_back(f);
  CHECK(tail == expect);
}

TEST_CASE("duplicated columns tie toward the lower index") {
  TestRand rnd(7);
  Problem p = make_problem(rnd, 40, 6);
  // Columns 2 and 4 become identical copies of column 1.
  for (std::size_t r = 0; r < p.rows; ++r) {
    p.values[r * p.cols + 2] = p.values[r * p.cols + 1];
    p.values[r * p.cols + 4] = p.values[r * p.cols + 1];
  }
  for (SelectorMethod m : {SelectorMethod::FSCR, SelectorMethod::MIM,
                           SelectorMethod::SRCC, SelectorMethod::PRCC}) {
    const auto r = rank_features(p.view(), p.y, m);
    std::size_t pos1 = 0, pos2 = 0, pos4 = 0;
    for (std::size_t i = 0; i < r.order.size(); ++i) {
      if (r.order[i] == 1) pos1 = i;
      if (r.order[i] == 2) pos2 = i;
      if (r.order[i] == 4) pos4 = i;
    }
    CHECK(pos1 < pos2);
    CHECK(pos2 < pos4);
  }
}

TEST_CASE("rankings are permutations with aligned scores") {
  TestRand rnd(8);
  const Problem p = make_problem(rnd, 44, 9);
  for (SelectorMethod m : all_selectors()) {
    const auto r = rank_features(p.view(), p.y, m);
    CHECK(r.method == m);
    REQUIRE(r.order.size() == p.cols);
    REQUIRE(r.scores.size() == p.cols);
    std::vector<std::size_t> sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < p.cols; ++i) CHECK(sorted[i] == i);
    if (m != SelectorMethod::MRMR)
      for (std::size_t i = 0; i + 1 < p.cols; ++i)
        CHECK(r.scores[i] >= r.scores[i + 1]);
  }
}

TEST_CASE("top-k selection validates its bounds") {
  TestRand rnd(9);
  const Problem p = make_problem(rnd, 40, 5);
  const auto r = rank_features(p.view(), p.y, SelectorMethod::MIM);
  const auto top3 = select_top_k(r, 3);
  REQUIRE(top3.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(top3[i] == r.order[i]);
  CHECK_THROWS_AS(select_top_k(r, 0), Error);
  CHECK_THROWS_AS(select_top_k(r, 6), Error);
}

TEST_CASE("degenerate inputs are rejected") {
  TestRand rnd(10);
  Problem p = make_problem(rnd, 40, 4);
  std::vector<int> ones(p.rows, 1);
  CHECK_THROWS_AS(rank_features(p.view(), ones, SelectorMethod::MIM), Error);
  std::vector<int> nearly(p.rows, 1);
  nearly[0] = 0;
  CHECK_THROWS_AS(rank_features(p.view(), nearly, SelectorMethod::MIM), Error);
  p.values[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rank_features(p.view(), p.y, SelectorMethod::MIM), Error);
}

TEST_CASE("selector names round-trip") {
  for (SelectorMethod m : all_selectors())
    CHECK(selector_from_name(selector_name(m)) == m);
  CHECK_THROWS_AS(selector_from_name("NOPE"), Error);
}

TEST_CASE("ranking csv carries the audit columns") {
  TempDir dir("rank");
  TestRand rnd(11);
  const Problem p = make_problem(rnd, 40, 3);
  const auto r = rank_features(p.view(), p.y, SelectorMethod::FSCR);
  write_ranking_csv(dir.file("r.csv"), r, {"fa", "fb", "fc"}, 0x1234u);
  std::ifstream in(dir.file("r.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# config_hash=00001234");
  std::getline(in, line);
  CHECK(line == "rank,feature_name,score,method");
  std::getline(in, line);
  CHECK(line.rfind("1,f", 0) == 0);
  CHECK(line.find("FSCR") != std::string::npos);
}

#include "optomx/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "optomx/csv.hpp"
#include "optomx/error.hpp"

namespace optomx {
namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;

void check_labels(const std::vector<int>& y) {
  std::size_t ones = 0;
  for (int v : y) ones += static_cast<std::size_t>(v != 0);
  if (ones < 2 || y.size() - ones < 2)
    fail(ErrorCode::DegenerateInput,
         "feature ranking needs at least 2 samples per class");
}

// Plug-in mutual information (bits) of two integer codings.
double mi_discrete(const std::vector<int>& a, int na, const std::vector<int>& b,
                   int nb) {
  const std::size_t n = a.size();
  std::vector<double> joint(static_cast<std::size_t>(na) * nb, 0.0);
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(a[i]) * nb + b[i]] += 1.0;
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
  }
  const double nd = static_cast<double>(n);
  double mi = 0.0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double pij = joint[static_cast<std::size_t>(i) * nb + j];
      if (pij <= 0.0) continue;
      mi += pij / nd * std::log(pij * nd / (pa[i] * pb[j])) / kLog2;
    }
  return std::max(mi, 0.0);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Average ranks (1-based) with midranks for ties.
std::vector<double> rank_transform(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> column(const MatrixView& X, std::size_t c) {
  std::vector<double> out(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) out[r] = X.at(r, c);
  return out;
}

double fisher_score(const std::vector<double>& x, const std::vector<int>& y) {
  double m[2] = {0, 0}, n[2] = {0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    m[y[i] != 0] += x[i];
    n[y[i] != 0] += 1.0;
  }
  const double mu = (m[0] + m[1]) / static_cast<double>(x.size());
  for (int c = 0; c < 2; ++c) m[c] /= n[c];
  double v[2] = {0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] != 0;
    v[c] += (x[i] - m[c]) * (x[i] - m[c]);
  }
  double num = 0.0, den = 0.0;
  for (int c = 0; c < 2; ++c) {
    num += n[c] * (m[c] - mu) * (m[c] - mu);
    den += v[c];  // n_c * population variance
  }
  if (den <= 0.0) return num > 1e-300 ? 1e30 : 0.0;
  return num / den;
}

double chi_square(const std::vector<int>& bins_x, int nb,
                  const std::vector<int>& y) {
  std::vector<double> table(static_cast<std::size_t>(nb) * 2, 0.0);
  std::vector<double> row(nb, 0.0);
  double col[2] = {0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int c = y[i] != 0;
    table[static_cast<std::size_t>(bins_x[i]) * 2 + c] += 1.0;
    row[bins_x[i]] += 1.0;
    col[c] += 1.0;
  }
  const double n = static_cast<double>(y.size());
  double chi2 = 0.0;
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < 2; ++c) {
      const double expected = row[b] * col[c] / n;
      if (expected <= 0.0) continue;
      const double d = table[static_cast<std::size_t>(b) * 2 + c] - expected;
      chi2 += d * d / expected;
    }
  return chi2;
}

double gini_split_gain(const std::vector<double>& x, const std::vector<int>& y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double total1 = 0.0;
  for (int v : y) total1 += static_cast<double>(v != 0);
  const double nd = static_cast<double>(n);
  auto gini = [](double pos, double cnt) {
    if (cnt <= 0.0) return 0.0;
    const double p = pos / cnt;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  };
  const double parent = gini(total1, nd);
  double left1 = 0.0, best = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left1 += static_cast<double>(y[idx[i]] != 0);
    if (x[idx[i + 1]] == x[idx[i]]) continue;  // no boundary here
    const double nl = static_cast<double>(i + 1), nr = nd - nl;
    const double child =
        nl / nd * gini(left1, nl) + nr / nd * gini(total1 - left1, nr);
    best = std::max(best, parent - child);
  }
  return best;
}

std::vector<std::size_t> sorted_by_score(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

FeatureRanking from_scores(SelectorMethod method,
                           const std::vector<double>& scores) {
  FeatureRanking r;
  r.method = method;
  r.order = sorted_by_score(scores);
  r.scores.reserve(scores.size());
  for (std::size_t f : r.order) r.scores.push_back(scores[f]);
  return r;
}

FeatureRanking mrmr_rank(const MatrixView& X, const std::vector<int>& y,
                         int bins, std::size_t greedy_limit) {
  const std::size_t d = X.cols;
  std::vector<std::vector<int>> disc(d);
  std::vector<double> relevance(d);
  std::vector<int> ybits(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ybits[i] = y[i] != 0;
  for (std::size_t f = 0; f < d; ++f) {
    const auto col = column(X, f);
    disc[f] = discretize_equal_frequency(col.data(), col.size(), bins);
    relevance[f] = mi_discrete(disc[f], bins, ybits, 2);
  }

  const std::size_t steps = greedy_limit == 0 ? d : std::min(greedy_limit, d);
  FeatureRanking r;
  r.method = SelectorMethod::MRMR;
  std::vector<char> taken(d, 0);
  std::vector<double> redundancy_sum(d, 0.0);
  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t best = d;
    double best_score = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      if (taken[f]) continue;
      const double score =
          step == 0 ? relevance[f]
                    : relevance[f] - redundancy_sum[f] / static_cast<double>(step);
      if (best == d || score > best_score) {
        best = f;
        best_score = score;
      }
    }
    taken[best] = 1;
    r.order.push_back(best);
    r.scores.push_back(best_score);
    if (step + 1 < steps)
      for (std::size_t f = 0; f < d; ++f)
        if (!taken[f])
          redundancy_sum[f] += mi_discrete(disc[f], bins, disc[best], bins);
  }
  if (steps < d) {
    // Beyond the greedy horizon: relevance order, still deterministic.
    std::vector<std::size_t> rest;
    for (std::size_t f = 0; f < d; ++f)
      if (!taken[f]) rest.push_back(f);
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      if (relevance[a] != relevance[b]) return relevance[a] > relevance[b];
      return a < b;
    });
    for (std::size_t f : rest) {
      r.order.push_back(f);
      r.scores.push_back(relevance[f]);
    }
  }
  return r;
}

}  // namespace

const std::vector<SelectorMethod>& all_selectors() {
  static const std::vector<SelectorMethod> all = {
      SelectorMethod::MRMR, SelectorMethod::FSCR, SelectorMethod::CHSQ,
      SelectorMethod::GINI, SelectorMethod::MIM,  SelectorMethod::SRCC,
      SelectorMethod::PRCC};
  return all;
}

std::string selector_name(SelectorMethod m) {
  switch (m) {
    case SelectorMethod::MRMR: return "MRMR";
    case SelectorMethod::FSCR: return "FSCR";
    case SelectorMethod::CHSQ: return "CHSQ";
    case SelectorMethod::GINI: return "GINI";
    case SelectorMethod::MIM: return "MIM";
    case SelectorMethod::SRCC: return "SRCC";
    case SelectorMethod::PRCC: return "PRCC";
  }
  fail(ErrorCode::BadConfig, "unknown selector method");
}

SelectorMethod selector_from_name(const std::string& name) {
  for (SelectorMethod m : all_selectors())
    if (selector_name(m) == name) return m;
  fail(ErrorCode::BadConfig, "unknown selector method '" + name + "'");
}

std::vector<int> discretize_equal_frequency(const double* x, std::size_t n,
                                            int bins) {
  if (bins < 2) fail(ErrorCode::BadBinCount, "discretize: bins must be >= 2");
  std::vector<double> sorted(x, x + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(bins) - 1);
  for (int b = 1; b < bins; ++b)
    cuts.push_back(sorted[static_cast<std::size_t>(b) * n / bins]);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<int>(
        std::upper_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  return out;
}

double mutual_information(const std::vector<double>& x,
                          const std::vector<int>& y, int bins) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorCode::LengthMismatch,
         "mutual_information: x and y must have equal length >= 2");
  std::vector<int> ybits(y.size());
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ybits[i] = y[i] != 0;
    (ybits[i] ? has1 : has0) = true;
  }
  if (!has0 || !has1)
    fail(ErrorCode::DegenerateInput, "mutual_information: single-class labels");
  const auto disc = discretize_equal_frequency(x.data(), x.size(), bins);
  return mi_discrete(disc, bins, ybits, 2);
}

FeatureRanking rank_features(const MatrixView& X, const std::vector<int>& y,
                             SelectorMethod method, int mi_bins,
                             std::size_t greedy_limit) {
  if (X.rows != y.size() || X.rows < 4 || X.cols == 0)
    fail(ErrorCode::LengthMismatch, "rank_features: shape mismatch");
  check_labels(y);
  for (std::size_t i = 0; i < X.rows * X.cols; ++i)
    if (!std::isfinite(X.data[i]))
      fail(ErrorCode::NonFiniteInput, "rank_features: non-finite feature value");

  if (method == SelectorMethod::MRMR)
    return mrmr_rank(X, y, mi_bins, greedy_limit);

  std::vector<int> ybits(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ybits[i] = y[i] != 0;
  std::vector<double> ylin(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ylin[i] = ybits[i];
  const std::vector<double> yranks = rank_transform(ylin);

  std::vector<double> scores(X.cols, 0.0);
  for (std::size_t f = 0; f < X.cols; ++f) {
    const auto col = column(X, f);
    switch (method) {
      case SelectorMethod::FSCR:
        scores[f] = fisher_score(col, ybits);
        break;
      case SelectorMethod::CHSQ: {
        const auto disc =
            discretize_equal_frequency(col.data(), col.size(), mi_bins);
        scores[f] = chi_square(disc, mi_bins, ybits);
        break;
      }
      case SelectorMethod::GINI:
        scores[f] = gini_split_gain(col, ybits);
        break;
      case SelectorMethod::MIM: {
        const auto disc =
            discretize_equal_frequency(col.data(), col.size(), mi_bins);
        scores[f] = mi_discrete(disc, mi_bins, ybits, 2);
        break;
      }
      case SelectorMethod::SRCC:
        scores[f] = std::abs(pearson(rank_transform(col), yranks));
        break;
      case SelectorMethod::PRCC:
        scores[f] = std::abs(pearson(col, ylin));
        break;
      case SelectorMethod::MRMR:
        break;  // handled above
    }
  }
  return from_scores(method, scores);
}

std::vector<std::size_t> select_top_k(const FeatureRanking& r, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > r.order.size())
    fail(ErrorCode::BadK, "select_top_k: k = " + std::to_string(k) +
                              " outside [1, " + std::to_string(r.order.size()) +
                              "]");
  return {r.order.begin(), r.order.begin() + k};
}

void write_ranking_csv(const std::string& path, const FeatureRanking& r,
                       const std::vector<std::string>& names,
                       std::uint32_t config_hash) {
  if (names.size() != r.order.size())
    fail(ErrorCode::LengthMismatch, "write_ranking_csv: name count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  char hash_line[32];
  std::snprintf(hash_line, sizeof(hash_line), "# config_hash=%08x\n",
                config_hash);
  out << hash_line << "rank,feature_name,score,method\n";
  for (std::size_t i = 0; i < r.order.size(); ++i)
    out << (i + 1) << "," << names[r.order[i]] << "," << format_real(r.scores[i])
        << "," << selector_name(r.method) << "\n";
}

}  // namespace optomx

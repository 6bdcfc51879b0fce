#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/dataset.hpp"

namespace optomx {

enum class SelectorMethod { MRMR, FSCR, CHSQ, GINI, MIM, SRCC, PRCC };

const std::vector<SelectorMethod>& all_selectors();
std::string selector_name(SelectorMethod m);
SelectorMethod selector_from_name(const std::string& name);

struct FeatureRanking {
  SelectorMethod method;
  std::vector<std::size_t> order;  // permutation of feature indices
  std::vector<double> scores;      // aligned with order
};

// Equal-frequency binning: cut points at the sorted positions floor(b*n/bins);
// ties always land in the same bin. Returned codes are in [0, bins).
std::vector<int> discretize_equal_frequency(const double* x, std::size_t n,
                                            int bins);

// I(X;Y) in bits from the plug-in estimate on the joint table of the
// equal-frequency-binned x against the labels. Throws DegenerateInput when
// y carries a single class.
double mutual_information(const std::vector<double>& x,
                          const std::vector<int>& y, int bins);

// Ranks every feature by one of the seven criteria. Ties break toward the
// lower feature index. MRMR runs greedy forward selection with the
// difference (relevance minus mean redundancy) criterion; `greedy_limit`
// bounds the number of greedy steps (0 = rank everything greedily), after
// which remaining features follow in relevance order.
FeatureRanking rank_features(const MatrixView& X, const std::vector<int>& y,
                             SelectorMethod method, int mi_bins = 8,
                             std::size_t greedy_limit = 0);

// First k indices of the ranking order; BadK outside [1, feature count].
std::vector<std::size_t> select_top_k(const FeatureRanking& r, int k);

// Audit export: rank, feature_name, score, method.
void write_ranking_csv(const std::string& path, const FeatureRanking& r,
                       const std::vector<std::string>& names,
                       std::uint32_t config_hash);

}  // namespace optomx

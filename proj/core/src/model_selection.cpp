#include "optomx/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "optomx/csv.hpp"
#include "optomx/parallel.hpp"
#include "optomx/rng.hpp"

namespace optomx {
namespace {

std::vector<std::string> distinct_slices(const FeatureTable& table) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& m : table.meta)
    if (seen.insert(m.slice_id).second) out.push_back(m.slice_id);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& fold_slice,
                        std::size_t c, std::size_t s, std::size_t k) {
  std::uint64_t state = seed ^ fnv1a64(fold_slice);
  splitmix64(state);
  state ^= (c + 1) * 0x9e3779b97f4a7c15ull;
  splitmix64(state);
  state ^= (s + 1) * 0xc2b2ae3d27d4eb4full;
  splitmix64(state);
  state ^= (k + 1) * 0x165667b19e3779f9ull;
  return splitmix64(state);
}

}  // namespace

GridSpec default_grid() {
  GridSpec g;
  g.classifiers = all_classifiers();
  g.selectors = all_selectors();
  for (int k = 5; k <= 100; k += 5) g.ks.push_back(k);
  return g;
}

AccuracyCube loocv_grid(const FeatureTable& train, const GridSpec& grid,
                        const ClassifierParams& params, int mi_bins,
                        std::uint64_t seed, int threads) {
  if (grid.classifiers.empty() || grid.selectors.empty() || grid.ks.empty())
    fail(ErrorCode::BadConfig, "loocv_grid: empty grid axis");
  AccuracyCube cube;
  cube.grid = grid;
  cube.fold_slices = distinct_slices(train);
  if (cube.fold_slices.size() < 2)
    fail(ErrorCode::FoldDegenerate,
         "loocv_grid: need at least 2 distinct slices");
  const std::size_t folds = cube.fold_slices.size();
  cube.fold_acc.assign(grid.cells() * folds, 0.0);
  cube.mean_acc.assign(grid.cells(), 0.0);

  const int max_k = *std::max_element(grid.ks.begin(), grid.ks.end());
  const MatrixView full = view_of(train.values, train.rows(), train.cols());
  const std::vector<int> labels = train.labels();

  // Every error path runs before the parallel section; worker lambdas must
  // not throw across thread boundaries.
  for (double v : train.values)
    if (!std::isfinite(v))
      fail(ErrorCode::NonFiniteInput, "loocv_grid: non-finite feature value");
  std::vector<std::vector<std::size_t>> all_fit_rows(folds), all_held_rows(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    all_held_rows[f] = train.rows_of_slices({cube.fold_slices[f]});
    all_fit_rows[f] =
        train.rows_of_slices({cube.fold_slices[f]}, /*invert=*/true);
    bool has0 = false, has1 = false;
    for (std::size_t r : all_fit_rows[f]) (labels[r] ? has1 : has0) = true;
    if (!has0 || !has1)
      fail(ErrorCode::FoldDegenerate, "loocv_grid: fold '" +
                                          cube.fold_slices[f] +
                                          "' training part lacks a class");
  }

  parallel_for(folds, threads, [&](std::size_t f) {
    const std::string& held_slice = cube.fold_slices[f];
    const auto& held_rows = all_held_rows[f];
    const auto& fit_rows = all_fit_rows[f];

    std::vector<int> fit_y, held_y;
    for (std::size_t r : fit_rows) fit_y.push_back(labels[r]);
    for (std::size_t r : held_rows) held_y.push_back(labels[r]);

    std::vector<double> fit_x;
    fit_x.reserve(fit_rows.size() * full.cols);
    for (std::size_t r : fit_rows) {
      const double* row = full.row(r);
      fit_x.insert(fit_x.end(), row, row + full.cols);
    }
    const MatrixView fit_view = view_of(fit_x, fit_rows.size(), full.cols);
    const Standardizer std_fit = fit_standardizer(fit_view);
    const std::vector<double> fit_z = apply_standardizer(std_fit, fit_view);
    std::vector<double> held_z(held_rows.size() * full.cols);
    for (std::size_t i = 0; i < held_rows.size(); ++i)
      apply_standardizer(std_fit, full.row(held_rows[i]),
                         held_z.data() + i * full.cols);
    const MatrixView fit_zv = view_of(fit_z, fit_rows.size(), full.cols);

    for (std::size_t s = 0; s < grid.selectors.size(); ++s) {
      const FeatureRanking ranking =
          rank_features(fit_zv, fit_y, grid.selectors[s], mi_bins,
                        static_cast<std::size_t>(max_k));
      for (std::size_t ki = 0; ki < grid.ks.size(); ++ki) {
        const auto indices = select_top_k(ranking, grid.ks[ki]);
        const std::vector<double> fit_sel = gather_columns(fit_zv, indices);
        const MatrixView fit_sv =
            view_of(fit_sel, fit_rows.size(), indices.size());
        std::vector<double> held_sel(held_rows.size() * indices.size());
        for (std::size_t i = 0; i < held_rows.size(); ++i)
          for (std::size_t j = 0; j < indices.size(); ++j)
            held_sel[i * indices.size() + j] =
                held_z[i * full.cols + indices[j]];
        for (std::size_t c = 0; c < grid.classifiers.size(); ++c) {
          const Model model =
              optomx::train(grid.classifiers[c], fit_sv, fit_y, params,
                    cell_seed(seed, held_slice, c, s, ki));
          double hits = 0.0;
          for (std::size_t i = 0; i < held_rows.size(); ++i)
            if (predict(model, held_sel.data() + i * indices.size()) ==
                held_y[i])
              hits += 1.0;
          cube.fold_acc[cube.cell(c, s, ki) * folds + f] =
              hits / static_cast<double>(held_rows.size());
        }
      }
    }
  });

  for (std::size_t cell = 0; cell < grid.cells(); ++cell)
    cube.mean_acc[cell] =
        pairwise_sum(cube.fold_acc.data() + cell * folds, folds) /
        static_cast<double>(folds);
  return cube;
}

int plateau_select(const std::vector<int>& ks, const std::vector<double>& acc,
                   double c) {
  if (ks.size() != acc.size() || ks.empty())
    fail(ErrorCode::LengthMismatch, "plateau_select: curve shape mismatch");
  const std::size_t start = ks.size() / 2;  // largest 50% of k values
  const std::size_t m = ks.size() - start;
  double mean = 0.0;
  for (std::size_t i = start; i < ks.size(); ++i) mean += acc[i];
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (std::size_t i = start; i < ks.size(); ++i)
    var += (acc[i] - mean) * (acc[i] - mean);
  const double sd = m > 1 ? std::sqrt(var / static_cast<double>(m - 1)) : 0.0;
  const double lo = mean - c * sd, hi = mean + c * sd;
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (acc[i] >= lo && acc[i] <= hi) return ks[i];
  return ks[start];  // unreachable for sane curves; smallest plateau k
}

GridChoice choose_hyperparameters(const AccuracyCube& cube, double plateau_c) {
  const auto& grid = cube.grid;
  std::size_t best_c = 0, best_s = 0, best_k = 0;
  bool first = true;
  for (std::size_t c = 0; c < grid.classifiers.size(); ++c)
    for (std::size_t s = 0; s < grid.selectors.size(); ++s)
      for (std::size_t k = 0; k < grid.ks.size(); ++k) {
        if (first) {
          first = false;
          best_c = c;
          best_s = s;
          best_k = k;
          continue;
        }
        const double cur = cube.mean(c, s, k);
        const double best = cube.mean(best_c, best_s, best_k);
        const bool better =
            cur > best ||
            (cur == best &&
             (grid.ks[k] < grid.ks[best_k] ||
              (grid.ks[k] == grid.ks[best_k] &&
               (c < best_c || (c == best_c && s < best_s)))));
        if (better) {
          best_c = c;
          best_s = s;
          best_k = k;
        }
      }

  GridChoice choice;
  choice.classifier = grid.classifiers[best_c];
  choice.selector = grid.selectors[best_s];
  choice.best_mean_accuracy = cube.mean(best_c, best_s, best_k);
  std::vector<double> curve(grid.ks.size());
  for (std::size_t k = 0; k < grid.ks.size(); ++k)
    curve[k] = cube.mean(best_c, best_s, k);
  choice.k = plateau_select(grid.ks, curve, plateau_c);
  const auto ki = static_cast<std::size_t>(
      std::find(grid.ks.begin(), grid.ks.end(), choice.k) - grid.ks.begin());
  choice.k_mean_accuracy = cube.mean(best_c, best_s, ki);
  return choice;
}

TrainedPipeline fit_final(const FeatureTable& train, ModelKind kind,
                          SelectorMethod selector, int k,
                          const ClassifierParams& params, int mi_bins,
                          std::uint64_t seed, std::uint32_t config_hash) {
  const MatrixView full = view_of(train.values, train.rows(), train.cols());
  const std::vector<int> y = train.labels();
  TrainedPipeline p;
  p.standardizer = fit_standardizer(full);
  p.selector = selector;
  const std::vector<double> z = apply_standardizer(p.standardizer, full);
  const MatrixView zv = view_of(z, train.rows(), train.cols());
  const FeatureRanking ranking =
      rank_features(zv, y, selector, mi_bins, static_cast<std::size_t>(k));
  p.selected = select_top_k(ranking, k);
  const std::vector<double> sel = gather_columns(zv, p.selected);
  p.model = optomx::train(kind, view_of(sel, train.rows(), p.selected.size()), y,
                  params, seed);
  p.seed = seed;
  p.config_hash = config_hash;
  return p;
}

double predict_pipeline(const TrainedPipeline& p, const double* full_row,
                        std::size_t cols) {
  if (cols != p.standardizer.mean.size())
    fail(ErrorCode::DimensionMismatch, "predict_pipeline: row width mismatch");
  std::vector<double> z(cols);
  apply_standardizer(p.standardizer, full_row, z.data());
  std::vector<double> sel(p.selected.size());
  for (std::size_t i = 0; i < p.selected.size(); ++i) sel[i] = z[p.selected[i]];
  return predict_proba(p.model, sel.data());
}

namespace {
void write_hash_line(std::ofstream& out, std::uint32_t config_hash) {
  char line[32];
  std::snprintf(line, sizeof(line), "# config_hash=%08x\n", config_hash);
  out << line;
}
}  // namespace

void write_cube_csv(const std::string& path, const AccuracyCube& cube,
                    std::uint32_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  write_hash_line(out, config_hash);
  out << "classifier,selector,k,fold_slice_id,fold_accuracy\n";
  const auto& grid = cube.grid;
  for (std::size_t c = 0; c < grid.classifiers.size(); ++c)
    for (std::size_t s = 0; s < grid.selectors.size(); ++s)
      for (std::size_t k = 0; k < grid.ks.size(); ++k)
        for (std::size_t f = 0; f < cube.fold_slices.size(); ++f)
          out << classifier_name(grid.classifiers[c]) << ","
              << selector_name(grid.selectors[s]) << "," << grid.ks[k] << ","
              << cube.fold_slices[f] << "," << format_real(cube.fold(c, s, k, f))
              << "\n";
}

void write_cube_summary_csv(const std::string& path, const AccuracyCube& cube,
                            std::uint32_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  write_hash_line(out, config_hash);
  out << "classifier,selector,k,mean_accuracy\n";
  const auto& grid = cube.grid;
  for (std::size_t c = 0; c < grid.classifiers.size(); ++c)
    for (std::size_t s = 0; s < grid.selectors.size(); ++s)
      for (std::size_t k = 0; k < grid.ks.size(); ++k)
        out << classifier_name(grid.classifiers[c]) << ","
            << selector_name(grid.selectors[s]) << "," << grid.ks[k] << ","
            << format_real(cube.mean(c, s, k)) << "\n";
}

}  // namespace optomx

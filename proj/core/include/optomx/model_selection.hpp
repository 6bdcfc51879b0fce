#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/classifiers.hpp"
#include "optomx/features.hpp"
#include "optomx/selection.hpp"

namespace optomx {

struct GridSpec {
  std::vector<ModelKind> classifiers;
  std::vector<SelectorMethod> selectors;
  std::vector<int> ks;

  std::size_t cells() const {
    return classifiers.size() * selectors.size() * ks.size();
  }
};

// The full search space: 7 classifiers x 7 selectors x k in {5..100 step 5}
// = 980 cells.
GridSpec default_grid();

// Per-cell LOOCV accuracies; folds are held-out slices of the training set.
struct AccuracyCube {
  GridSpec grid;
  std::vector<std::string> fold_slices;  // fold order
  std::vector<double> fold_acc;          // [c][s][k][fold]
  std::vector<double> mean_acc;          // [c][s][k]

  std::size_t cell(std::size_t c, std::size_t s, std::size_t k) const {
    return (c * grid.selectors.size() + s) * grid.ks.size() + k;
  }
  double fold(std::size_t c, std::size_t s, std::size_t k,
              std::size_t f) const {
    return fold_acc[cell(c, s, k) * fold_slices.size() + f];
  }
  double mean(std::size_t c, std::size_t s, std::size_t k) const {
    return mean_acc[cell(c, s, k)];
  }
};

// For every fold (held-out slice) and grid cell: standardize, rank, select
// and train on the remaining slices only, then score patch accuracy on the
// held-out slice. Rankings are shared across classifiers and k within a
// (fold, selector) pair; the greedy horizon is max(ks).
AccuracyCube loocv_grid(const FeatureTable& train, const GridSpec& grid,
                        const ClassifierParams& params, int mi_bins,
                        std::uint64_t seed, int threads);

// Plateau rule for the feature count: the plateau is the largest 50% of k
// values; the tolerance region is mean +/- c * sample SD of those
// accuracies; returns the smallest k whose accuracy falls inside.
int plateau_select(const std::vector<int>& ks, const std::vector<double>& acc,
                   double c = 1.5);

struct GridChoice {
  ModelKind classifier = ModelKind::SVM;
  SelectorMethod selector = SelectorMethod::MRMR;
  int k = 0;
  double best_mean_accuracy = 0.0;  // at the argmax cell
  double k_mean_accuracy = 0.0;     // at the plateau-selected k
};

// Winner = highest LOOCV mean (ties: fewer features, then classifier order,
// then selector order); k then comes from the plateau rule applied to the
// winning pair's accuracy curve.
GridChoice choose_hyperparameters(const AccuracyCube& cube, double plateau_c);

struct TrainedPipeline {
  Standardizer standardizer;
  SelectorMethod selector = SelectorMethod::MRMR;
  std::vector<std::size_t> selected;  // prefix of the full-train ranking
  Model model;
  std::uint64_t seed = 0;
  std::uint32_t config_hash = 0;
};

TrainedPipeline fit_final(const FeatureTable& train, ModelKind kind,
                          SelectorMethod selector, int k,
                          const ClassifierParams& params, int mi_bins,
                          std::uint64_t seed, std::uint32_t config_hash);

// Tumor probability for one raw (unstandardized) full-width feature row.
double predict_pipeline(const TrainedPipeline& p, const double* full_row,
                        std::size_t cols);

// Cube exports: per-fold rows and cell means, both carrying the config hash.
void write_cube_csv(const std::string& path, const AccuracyCube& cube,
                    std::uint32_t config_hash);
void write_cube_summary_csv(const std::string& path, const AccuracyCube& cube,
                            std::uint32_t config_hash);

}  // namespace optomx

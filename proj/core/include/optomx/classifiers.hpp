#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "optomx/dataset.hpp"

namespace optomx {

// Per-column z-scoring with the population (n-denominator) SD; constant
// columns map to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;  // 0 marks a constant column
};

Standardizer fit_standardizer(const MatrixView& X);
void apply_standardizer(const Standardizer& s, const double* in, double* out);
std::vector<double> apply_standardizer(const Standardizer& s,
                                       const MatrixView& X);

enum class ModelKind { SVM, RF, KNN, DT, BST, BY, DA };

const std::vector<ModelKind>& all_classifiers();
std::string classifier_name(ModelKind k);
ModelKind classifier_from_name(const std::string& name);

// Hyperparameters for every family, with the defaults used throughout.
struct ClassifierParams {
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0 = 1/d
  double svm_tol = 1e-3;   // KKT tolerance for SMO
  int knn_k = 5;
  int tree_max_depth = 12;
  int tree_min_leaf = 5;
  int rf_trees = 100;
  bool rf_bootstrap = true;
  int rf_mtry = 0;  // 0 = round(sqrt(d))
  int bst_rounds = 100;
  double nb_var_floor = 1e-9;
  double lda_ridge = 1e-6;
};

struct SvmModel {
  double gamma = 0.0;
  double bias = 0.0;      // decision f(x) = sum coef_i K(sv_i, x) + bias
  double platt_a = 0.0;   // p = 1 / (1 + exp(a f + b))
  double platt_b = 0.0;
  std::vector<double> coef;             // alpha_i * y_i per support vector
  std::vector<double> support_vectors;  // n_sv x dim, row-major
};

struct KnnModel {
  int k = 5;
  std::vector<double> train_x;  // n x dim
  std::vector<std::uint8_t> train_y;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double prob = 0.0;  // leaf tumor fraction
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

struct BoostModel {
  std::vector<double> alphas;
  std::vector<TreeModel> stumps;
};

struct BayesModel {
  double log_prior[2] = {0.0, 0.0};
  std::vector<double> mean[2];
  std::vector<double> var[2];
};

struct LdaModel {
  std::vector<double> weights;
  double bias = 0.0;  // p = sigmoid(w . x + bias)
};

struct Model {
  ModelKind kind = ModelKind::SVM;
  std::size_t dim = 0;
  std::variant<SvmModel, KnnModel, TreeModel, ForestModel, BoostModel,
               BayesModel, LdaModel>
      params;
};

// Trains on standardized rows with binary labels. Throws SingleClass when
// only one class is present and NonFiniteInput on NaN/Inf entries. The seed
// drives bootstrap and feature subsampling (RF); the other families are
// draw-free.
Model train(ModelKind kind, const MatrixView& X, const std::vector<int>& y,
            const ClassifierParams& params, std::uint64_t seed);

// Tumor probability in [0,1]. The vector overload checks the dimension
// (DimensionMismatch); the pointer overload trusts the caller.
double predict_proba(const Model& m, const double* x);
double predict_proba(const Model& m, const std::vector<double>& x);
inline int predict(const Model& m, const double* x) {
  return predict_proba(m, x) >= 0.5 ? 1 : 0;
}
inline int predict(const Model& m, const std::vector<double>& x) {
  return predict_proba(m, x) >= 0.5 ? 1 : 0;
}

// SVM internals exposed for the dual-constraint checks: alpha_i * y_i and
// the raw decision value.
double svm_decision(const SvmModel& svm, std::size_t dim, const double* x);

// Weighted depth-limited CART used by DT/RF/BST. `sample_idx` may repeat
// entries (bootstrap); `feature_pool` limits split candidates (empty = all
// features); mtry > 0 draws that many candidates per split from the rng.
TreeModel build_cart(const MatrixView& X, const std::vector<int>& y,
                     const std::vector<double>& weights,
                     const std::vector<std::size_t>& sample_idx, int max_depth,
                     int min_leaf, int mtry, std::uint64_t rng_seed);

}  // namespace optomx

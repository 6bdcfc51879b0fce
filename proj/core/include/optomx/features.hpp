#pragma once

#include <array>
#include <string>
#include <vector>

#include "optomx/filterbank.hpp"
#include "optomx/image.hpp"

namespace optomx {

// 92 features per image: 18 first-order statistics on the continuous
// values plus 74 texture features on the quantized patch
// (23 co-occurrence + 16 run-length + 16 size-zone + 14 dependence +
// 5 neighborhood gray-tone difference). With the default 15-filter bank a
// patch yields 16 x 92 = 1,472 features.

inline constexpr int kFirstOrderCount = 18;
inline constexpr int kGlcmCount = 23;
inline constexpr int kGlrlmCount = 16;
inline constexpr int kGlszmCount = 16;
inline constexpr int kGldmCount = 14;
inline constexpr int kNgtdmCount = 5;
inline constexpr int kFeaturesPerImage = kFirstOrderCount + kGlcmCount +
                                         kGlrlmCount + kGlszmCount +
                                         kGldmCount + kNgtdmCount;

const std::vector<std::string>& first_order_names();
const std::vector<std::string>& glcm_names();
const std::vector<std::string>& glrlm_names();
const std::vector<std::string>& glszm_names();
const std::vector<std::string>& gldm_names();
const std::vector<std::string>& ngtdm_names();

// Texture matrices are exposed for verification; all are dense row-major.
struct TextureMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double sum() const;
};

// The four symmetric distance-1 offsets used by directed families,
// as (row, col) deltas.
inline constexpr std::array<std::array<int, 2>, 4> kDirections2D{
    {{0, 1}, {1, 1}, {1, 0}, {1, -1}}};

// Symmetric co-occurrence counts for one offset (Ng x Ng, unnormalized).
TextureMatrix glcm_matrix(const DiscretePatch& dp, int dr, int dc);
// Run-length counts for one direction (Ng x max_run_length).
TextureMatrix glrlm_matrix(const DiscretePatch& dp, int dr, int dc);
// Size-zone counts over 8-connected equal-level zones (Ng x max_zone_size).
TextureMatrix glszm_matrix(const DiscretePatch& dp);
// Dependence counts with alpha = 0 over the 8-neighborhood
// (Ng x 9; column j holds dependence count j).
TextureMatrix gldm_matrix(const DiscretePatch& dp);
// Neighborhood gray-tone sums: per level i (1..Ng), n_i occurrences and
// s_i summed absolute deviation from the 8-neighborhood mean.
struct NgtdmTable {
  std::vector<double> n;  // size Ng
  std::vector<double> s;  // size Ng
  std::size_t pixel_count = 0;
};
NgtdmTable ngtdm_table(const DiscretePatch& dp);

// First-order statistics. Entropy and Uniformity use the fixed-bin-count
// histogram (same level map as quantize); Kurtosis is excess kurtosis;
// TotalEnergy scales Energy by the pixel area. Throws EmptyPatch for
// fewer than 2 values.
std::vector<double> first_order(const std::vector<double>& values,
                                double pixel_area_mm2, int num_levels);

// Texture families; directed families (GLCM, GLRLM) average feature-wise
// over the four offsets. Degenerate single-cell matrices resolve to the
// documented conventions (Correlation = 1, Imc1 = Imc2 = 0, MCC = 1,
// Coarseness capped at 1e6) so vectors are always NaN-free.
std::vector<double> glcm_features(const DiscretePatch& dp);
std::vector<double> glrlm_features(const DiscretePatch& dp);
std::vector<double> glszm_features(const DiscretePatch& dp);
std::vector<double> gldm_features(const DiscretePatch& dp);
std::vector<double> ngtdm_features(const DiscretePatch& dp);

// All 92 features of one image (continuous values + quantized levels).
std::vector<double> image_features(const GrayImage& img, int num_levels);

// Full per-patch vector: original image plus every filter in the bank, 92
// features each, concatenated in bank order.
std::vector<double> optomic_vector(const GrayImage& patch,
                                   const std::vector<FilterSpec>& bank,
                                   int num_levels);

// Canonical column names "<filter>_<class>_<feature>" matching
// optomic_vector's layout ("original" first).
std::vector<std::string> feature_names(const std::vector<FilterSpec>& bank);

// Patch-level dataset; rows align with meta entries.
struct PatchMeta {
  std::string slice_id;
  std::string patient_id;
  int dose_group = 1;
  int patch_id = 0;
  int center_row_px = 0;
  int center_col_px = 0;
  double size_mm = 0.0;
  int label = 0;  // 0 = normal, 1 = tumor
};

struct FeatureTable {
  std::vector<std::string> names;
  std::vector<PatchMeta> meta;
  std::vector<double> values;  // rows x names.size(), row-major

  std::size_t rows() const { return meta.size(); }
  std::size_t cols() const { return names.size(); }
  const double* row(std::size_t r) const { return values.data() + r * cols(); }
  double* row(std::size_t r) { return values.data() + r * cols(); }

  std::vector<int> labels() const;
  std::vector<std::string> slice_ids() const;
  // Row indices belonging (or not) to the given slice ids.
  std::vector<std::size_t> rows_of_slices(const std::vector<std::string>& ids,
                                          bool invert = false) const;
  FeatureTable subset(const std::vector<std::size_t>& row_indices) const;
};

// Feature CSV: "# config_hash=<hex>" comment, header of metadata columns
// then canonical feature names, one row per patch, 17-significant-digit
// reals, LF line endings.
void write_feature_csv(const std::string& path, const FeatureTable& table,
                       std::uint32_t config_hash);
FeatureTable read_feature_csv(const std::string& path,
                              std::uint32_t& config_hash);

}  // namespace optomx

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// Scattered-data interpolation with the 2D biharmonic Green's function
// g(r) = r^2 (ln r - 1), g(0) = 0.
struct SplineModel {
  std::vector<double> center_rows;
  std::vector<double> center_cols;
  std::vector<double> weights;
  std::vector<double> values;  // per-center data after duplicate averaging
};

double biharmonic_green(double r);

// Solves (G + lambda I) w = v with G_ij = g(distance between centers) and
// lambda = 1e-12 * mean absolute row sum of G. Exact duplicates are
// averaged first. Throws SingularSystem when the ridged solve still leaves
// a residual above 1e-6.
SplineModel biharmonic_fit(const std::vector<double>& center_rows,
                           const std::vector<double>& center_cols,
                           const std::vector<double>& values);

// Interpolant at one point (pre-clip).
double biharmonic_value(const SplineModel& m, double row, double col);

struct ProbabilityMap {
  GrayImage grid;                  // clipped to [0,1]
  std::vector<std::uint8_t> mask;  // 1 = tissue pixel (valid region)
};

// Direct O(centers x pixels) evaluation over the full grid; values are
// clipped to [0,1] only here, never inside the solve.
ProbabilityMap biharmonic_eval(const SplineModel& m, int width, int height,
                               const std::vector<std::uint8_t>& tissue_mask,
                               int threads = 1);

// Per-center arithmetic mean across the patch scales (the three lists must
// share one center list, enforced by length).
std::vector<double> fuse_scales(
    const std::vector<std::vector<double>>& per_scale_probs);

// 8-bit RGB overlay: grayscale base with tissue pixels alpha-0.5 blended
// against a blue (p=0) to yellow (p=1) colormap.
std::vector<std::uint8_t> render_heatmap_rgb(const ProbabilityMap& map,
                                             const GrayImage& base);
void render_heatmap(const std::string& path, const ProbabilityMap& map,
                    const GrayImage& base);

}  // namespace optomx

#include "optomx/probmap.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

#include "optomx/imageio.hpp"
#include "optomx/parallel.hpp"

namespace optomx {

double biharmonic_green(double r) {
  if (r <= 0.0) return 0.0;  // limit of r^2 (ln r - 1) as r -> 0+
  return r * r * (std::log(r) - 1.0);
}

SplineModel biharmonic_fit(const std::vector<double>& center_rows,
                           const std::vector<double>& center_cols,
                           const std::vector<double>& values) {
  if (center_rows.size() != center_cols.size() ||
      center_rows.size() != values.size())
    fail(ErrorCode::LengthMismatch, "biharmonic_fit: input length mismatch");
  if (center_rows.empty())
    fail(ErrorCode::EmptyRoi, "biharmonic_fit: no centers");

  // Exact duplicates collapse to their mean value.
  std::map<std::pair<double, double>, std::pair<double, int>> dedup;
  for (std::size_t i = 0; i < center_rows.size(); ++i) {
    auto& slot = dedup[{center_rows[i], center_cols[i]}];
    slot.first += values[i];
    slot.second += 1;
  }
  SplineModel m;
  for (const auto& [pos, acc] : dedup) {
    m.center_rows.push_back(pos.first);
    m.center_cols.push_back(pos.second);
    m.values.push_back(acc.first / acc.second);
  }

  const auto n = static_cast<Eigen::Index>(m.values.size());
  Eigen::MatrixXd G(n, n);
  double abs_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dr = m.center_rows[i] - m.center_rows[j];
      const double dc = m.center_cols[i] - m.center_cols[j];
      G(i, j) = biharmonic_green(std::sqrt(dr * dr + dc * dc));
      abs_sum += std::abs(G(i, j));
    }
  // The ridge only has to fend off near-duplicate centers; it is kept small
  // enough (node perturbation is lambda * |w|) that the interpolant still
  // reproduces its node values to well under 1e-6.
  const double lambda = 1e-12 * abs_sum / static_cast<double>(n);
  Eigen::MatrixXd ridged = G;
  ridged.diagonal().array() += lambda;

  const Eigen::Map<const Eigen::VectorXd> v(m.values.data(), n);
  const Eigen::VectorXd w = ridged.partialPivLu().solve(v);
  if (!w.allFinite() || (ridged * w - v).lpNorm<Eigen::Infinity>() > 1e-6)
    fail(ErrorCode::SingularSystem,
         "biharmonic_fit: ridged system could not be solved");
  m.weights.assign(w.data(), w.data() + n);
  return m;
}

double biharmonic_value(const SplineModel& m, double row, double col) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const double dr = row - m.center_rows[i];
    const double dc = col - m.center_cols[i];
    acc += m.weights[i] * biharmonic_green(std::sqrt(dr * dr + dc * dc));
  }
  return acc;
}

ProbabilityMap biharmonic_eval(const SplineModel& m, int width, int height,
                               const std::vector<std::uint8_t>& tissue_mask,
                               int threads) {
  if (!tissue_mask.empty() &&
      tissue_mask.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::ShapeMismatch, "biharmonic_eval: mask shape mismatch");
  ProbabilityMap out;
  out.grid = GrayImage(width, height);
  out.mask = tissue_mask.empty()
                 ? std::vector<std::uint8_t>(
                       static_cast<std::size_t>(width) * height, 1)
                 : tissue_mask;
  parallel_for(static_cast<std::size_t>(height), threads, [&](std::size_t r) {
    for (int c = 0; c < width; ++c) {
      const double v = biharmonic_value(m, static_cast<double>(r),
                                        static_cast<double>(c));
      out.grid.at(static_cast<int>(r), c) = std::clamp(v, 0.0, 1.0);
    }
  });
  return out;
}

std::vector<double> fuse_scales(
    const std::vector<std::vector<double>>& per_scale_probs) {
  if (per_scale_probs.empty())
    fail(ErrorCode::CenterMismatch, "fuse_scales: no scales");
  const std::size_t n = per_scale_probs.front().size();
  for (const auto& probs : per_scale_probs)
    if (probs.size() != n)
      fail(ErrorCode::CenterMismatch,
           "fuse_scales: scales disagree on the center list");
  std::vector<double> fused(n, 0.0);
  for (const auto& probs : per_scale_probs)
    for (std::size_t i = 0; i < n; ++i) fused[i] += probs[i];
  const double scales = static_cast<double>(per_scale_probs.size());
  for (auto& v : fused) v /= scales;
  return fused;
}

std::vector<std::uint8_t> render_heatmap_rgb(const ProbabilityMap& map,
                                             const GrayImage& base) {
  if (!map.grid.same_shape(base))
    fail(ErrorCode::ShapeMismatch, "render_heatmap: shape mismatch");
  const std::size_t n = base.size();
  std::vector<std::uint8_t> rgb(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = std::clamp(base[i], 0.0, 1.0) * 255.0;
    double r_out = g, g_out = g, b_out = g;
    if (map.mask[i]) {
      const double p = map.grid[i];
      // blue (p = 0) to yellow (p = 1)
      const double tint_r = 255.0 * p;
      const double tint_g = 255.0 * p;
      const double tint_b = 255.0 * (1.0 - p);
      r_out = 0.5 * g + 0.5 * tint_r;
      g_out = 0.5 * g + 0.5 * tint_g;
      b_out = 0.5 * g + 0.5 * tint_b;
    }
    rgb[i * 3] = static_cast<std::uint8_t>(std::lround(r_out));
    rgb[i * 3 + 1] = static_cast<std::uint8_t>(std::lround(g_out));
    rgb[i * 3 + 2] = static_cast<std::uint8_t>(std::lround(b_out));
  }
  return rgb;
}

void render_heatmap(const std::string& path, const ProbabilityMap& map,
                    const GrayImage& base) {
  write_png8_rgb(path, render_heatmap_rgb(map, base), base.width(),
                 base.height());
}

}  // namespace optomx

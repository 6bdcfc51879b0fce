#include "optomx/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "optomx/csv.hpp"
#include "optomx/imaging.hpp"

namespace optomx {
namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;  // ln 2

double log2_safe(double p) { return std::log(p) / kLog2; }

double percentile_linear(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q / 100.0 * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted[n - 1];
  return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

void check_patch(const DiscretePatch& dp) {
  if (dp.width < 1 || dp.height < 1 || dp.levels.empty())
    fail(ErrorCode::DegenerateMatrix, "texture features: empty patch");
  if (dp.num_levels < 2)
    fail(ErrorCode::BadBinCount, "texture features: Ng must be >= 2");
}

std::vector<double> average_over_directions(
    const std::array<std::vector<double>, 4>& per_dir) {
  std::vector<double> out(per_dir[0].size(), 0.0);
  for (const auto& v : per_dir)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  for (auto& v : out) v *= 0.25;
  return out;
}

}  // namespace

double TextureMatrix::sum() const {
  return std::accumulate(data.begin(), data.end(), 0.0);
}

const std::vector<std::string>& first_order_names() {
  static const std::vector<std::string> names = {
      "Energy", "TotalEnergy", "Entropy", "Minimum", "Percentile10",
      "Percentile90", "Maximum", "Mean", "Median", "InterquartileRange",
      "Range", "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
      "RootMeanSquared", "Skewness", "Kurtosis", "Variance", "Uniformity"};
  return names;
}

const std::vector<std::string>& glcm_names() {
  static const std::vector<std::string> names = {
      "Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade",
      "ClusterTendency", "Contrast", "Correlation", "DifferenceAverage",
      "DifferenceEntropy", "DifferenceVariance", "JointEnergy", "JointEntropy",
      "Imc1", "Imc2", "Idm", "Idmn", "Id", "Idn", "InverseVariance",
      "MaximumProbability", "SumEntropy", "SumSquares", "MCC"};
  return names;
}

const std::vector<std::string>& glrlm_names() {
  static const std::vector<std::string> names = {
      "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity",
      "GrayLevelNonUniformityNormalized", "RunLengthNonUniformity",
      "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
      "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis",
      "HighGrayLevelRunEmphasis", "ShortRunLowGrayLevelEmphasis",
      "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
      "LongRunHighGrayLevelEmphasis"};
  return names;
}

const std::vector<std::string>& glszm_names() {
  static const std::vector<std::string> names = {
      "SmallAreaEmphasis", "LargeAreaEmphasis", "GrayLevelNonUniformity",
      "GrayLevelNonUniformityNormalized", "SizeZoneNonUniformity",
      "SizeZoneNonUniformityNormalized", "ZonePercentage", "GrayLevelVariance",
      "ZoneVariance", "ZoneEntropy", "LowGrayLevelZoneEmphasis",
      "HighGrayLevelZoneEmphasis", "SmallAreaLowGrayLevelEmphasis",
      "SmallAreaHighGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis",
      "LargeAreaHighGrayLevelEmphasis"};
  return names;
}

const std::vector<std::string>& gldm_names() {
  static const std::vector<std::string> names = {
      "SmallDependenceEmphasis", "LargeDependenceEmphasis",
      "GrayLevelNonUniformity", "DependenceNonUniformity",
      "DependenceNonUniformityNormalized", "GrayLevelVariance",
      "DependenceVariance", "DependenceEntropy", "LowGrayLevelEmphasis",
      "HighGrayLevelEmphasis", "SmallDependenceLowGrayLevelEmphasis",
      "SmallDependenceHighGrayLevelEmphasis",
      "LargeDependenceLowGrayLevelEmphasis",
      "LargeDependenceHighGrayLevelEmphasis"};
  return names;
}

const std::vector<std::string>& ngtdm_names() {
  static const std::vector<std::string> names = {"Coarseness", "Contrast",
                                                 "Busyness", "Complexity",
                                                 "Strength"};
  return names;
}

// ---------------------------------------------------------------------------
// first order
// ---------------------------------------------------------------------------

std::vector<double> first_order(const std::vector<double>& values,
                                double pixel_area_mm2, int num_levels) {
  const std::size_t n = values.size();
  if (n < 2) fail(ErrorCode::EmptyPatch, "first_order: need at least 2 pixels");
  if (num_levels < 2)
    fail(ErrorCode::BadBinCount, "first_order: Ng must be >= 2");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double nd = static_cast<double>(n);

  double energy = 0.0, mean = 0.0;
  for (double v : values) {
    energy += v * v;
    mean += v;
  }
  mean /= nd;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    mad += std::abs(d);
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  mad /= nd;

  const double minimum = sorted.front();
  const double maximum = sorted.back();
  const double p10 = percentile_linear(sorted, 10.0);
  const double p25 = percentile_linear(sorted, 25.0);
  const double median = percentile_linear(sorted, 50.0);
  const double p75 = percentile_linear(sorted, 75.0);
  const double p90 = percentile_linear(sorted, 90.0);

  // Robust MAD: absolute deviation from the mean of the values that fall
  // in [P10, P90]; empty subset resolves to 0.
  double robust_sum = 0.0, robust_mean = 0.0;
  std::size_t robust_n = 0;
  for (double v : values)
    if (v >= p10 && v <= p90) {
      robust_mean += v;
      ++robust_n;
    }
  double rmad = 0.0;
  if (robust_n > 0) {
    robust_mean /= static_cast<double>(robust_n);
    for (double v : values)
      if (v >= p10 && v <= p90) robust_sum += std::abs(v - robust_mean);
    rmad = robust_sum / static_cast<double>(robust_n);
  }

  // An exactly constant patch has zero spread by definition; the summed
  // moments can carry rounding residue from the mean (the constant itself
  // need not be representable), so they are pinned to zero here.
  if (minimum == maximum) m2 = m3 = m4 = mad = rmad = 0.0;

  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  // Histogram statistics on the fixed-bin-count level map.
  std::vector<double> hist(static_cast<std::size_t>(num_levels), 0.0);
  for (double v : values) {
    const int level =
        std::clamp(static_cast<int>(std::floor(v * num_levels)) + 1, 1,
                   num_levels);
    hist[static_cast<std::size_t>(level - 1)] += 1.0;
  }
  double entropy = 0.0, uniformity = 0.0;
  for (double count : hist) {
    if (count <= 0.0) continue;
    const double p = count / nd;
    entropy -= p * log2_safe(p);
    uniformity += p * p;
  }

  return {energy,
          energy * pixel_area_mm2,
          entropy,
          minimum,
          p10,
          p90,
          maximum,
          mean,
          median,
          p75 - p25,
          maximum - minimum,
          mad,
          rmad,
          std::sqrt(energy / nd),
          skewness,
          kurtosis,
          m2,
          uniformity};
}

// ---------------------------------------------------------------------------
// GLCM
// ---------------------------------------------------------------------------

TextureMatrix glcm_matrix(const DiscretePatch& dp, int dr, int dc) {
  check_patch(dp);
  TextureMatrix m;
  m.rows = m.cols = dp.num_levels;
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (int r = 0; r < dp.height; ++r)
    for (int c = 0; c < dp.width; ++c) {
      const int r2 = r + dr, c2 = c + dc;
      if (r2 < 0 || r2 >= dp.height || c2 < 0 || c2 >= dp.width) continue;
      const int i = dp.at(r, c) - 1;
      const int j = dp.at(r2, c2) - 1;
      m.at(i, j) += 1.0;
      m.at(j, i) += 1.0;
    }
  return m;
}

namespace {

std::vector<double> glcm_features_one(const TextureMatrix& counts) {
  const int ng = counts.rows;
  const double total = counts.sum();
  if (total <= 0.0)
    fail(ErrorCode::DegenerateMatrix, "glcm: direction has no pixel pairs");

  // Normalized joint probabilities and marginals.
  std::vector<double> p(counts.data);
  for (auto& v : p) v /= total;
  auto P = [&](int i, int j) { return p[static_cast<std::size_t>(i) * ng + j]; };

  std::vector<double> px(ng, 0.0);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) px[i] += P(i, j);

  double mu = 0.0;
  for (int i = 0; i < ng; ++i) mu += (i + 1) * px[i];
  double var = 0.0;
  for (int i = 0; i < ng; ++i) var += (i + 1 - mu) * (i + 1 - mu) * px[i];

  std::vector<double> p_sum(2 * ng + 1, 0.0);   // index i+j in [2, 2Ng]
  std::vector<double> p_diff(ng, 0.0);          // index |i-j| in [0, Ng-1]
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      p_sum[static_cast<std::size_t>(i + j + 2)] += P(i, j);
      p_diff[static_cast<std::size_t>(std::abs(i - j))] += P(i, j);
    }

  double autocorrelation = 0.0, cluster_prominence = 0.0, cluster_shade = 0.0,
         cluster_tendency = 0.0, contrast = 0.0, joint_energy = 0.0,
         joint_entropy = 0.0, idm = 0.0, idmn = 0.0, id = 0.0, idn = 0.0,
         max_prob = 0.0, sum_squares = 0.0, corr_num = 0.0, hxy1 = 0.0;
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      const double pij = P(i, j);
      const double gi = i + 1, gj = j + 1;
      const double diff = gi - gj;
      autocorrelation += gi * gj * pij;
      const double dev = gi + gj - 2.0 * mu;
      cluster_prominence += dev * dev * dev * dev * pij;
      cluster_shade += dev * dev * dev * pij;
      cluster_tendency += dev * dev * pij;
      contrast += diff * diff * pij;
      joint_energy += pij * pij;
      idm += pij / (1.0 + diff * diff);
      idmn += pij / (1.0 + diff * diff / (static_cast<double>(ng) * ng));
      id += pij / (1.0 + std::abs(diff));
      idn += pij / (1.0 + std::abs(diff) / ng);
      max_prob = std::max(max_prob, pij);
      sum_squares += (gi - mu) * (gi - mu) * pij;
      corr_num += gi * gj * pij;
      if (pij > 0.0) {
        joint_entropy -= pij * log2_safe(pij);
        hxy1 -= pij * log2_safe(px[i] * px[j]);
      }
    }

  const double correlation =
      var > 0.0 ? (corr_num - mu * mu) / var : 1.0;  // degenerate: 1

  double diff_avg = 0.0, diff_entropy = 0.0;
  for (int k = 0; k < ng; ++k) {
    diff_avg += k * p_diff[k];
    if (p_diff[k] > 0.0) diff_entropy -= p_diff[k] * log2_safe(p_diff[k]);
  }
  double diff_var = 0.0;
  for (int k = 0; k < ng; ++k)
    diff_var += (k - diff_avg) * (k - diff_avg) * p_diff[k];

  double sum_entropy = 0.0;
  for (double q : p_sum)
    if (q > 0.0) sum_entropy -= q * log2_safe(q);

  double inverse_variance = 0.0;
  for (int k = 1; k < ng; ++k)
    inverse_variance += p_diff[k] / (static_cast<double>(k) * k);

  // Informational measures of correlation.
  double hx = 0.0;
  for (double q : px)
    if (q > 0.0) hx -= q * log2_safe(q);
  double hxy2 = 0.0;
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      const double q = px[i] * px[j];
      if (q > 0.0) hxy2 -= q * log2_safe(q);
    }
  const double imc1 = hx > 0.0 ? (joint_entropy - hxy1) / hx : 0.0;
  const double imc2_arg = 1.0 - std::exp(-2.0 * (hxy2 - joint_entropy));
  const double imc2 = imc2_arg > 0.0 ? std::sqrt(imc2_arg) : 0.0;

  // Maximal correlation coefficient via the symmetric similarity trick:
  // Q = D^-1 P D^-1 P is similar to S^2 with S = D^-1/2 P D^-1/2 over the
  // gray levels actually present, so eig(Q) are the squared eigenvalues
  // of the symmetric S.
  std::vector<int> present;
  for (int i = 0; i < ng; ++i)
    if (px[i] > 0.0) present.push_back(i);
  double mcc = 1.0;
  if (present.size() > 1) {
    const int m = static_cast<int>(present.size());
    Eigen::MatrixXd S(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        S(a, b) = P(present[a], present[b]) /
                  std::sqrt(px[present[a]] * px[present[b]]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
    std::vector<double> sq(m);
    for (int a = 0; a < m; ++a) {
      const double lambda = solver.eigenvalues()[a];
      sq[a] = lambda * lambda;
    }
    std::sort(sq.begin(), sq.end(), std::greater<double>());
    mcc = std::sqrt(std::max(sq[1], 0.0));
  }

  return {autocorrelation,
          mu,
          cluster_prominence,
          cluster_shade,
          cluster_tendency,
          contrast,
          correlation,
          diff_avg,
          diff_entropy,
          diff_var,
          joint_energy,
          joint_entropy,
          imc1,
          imc2,
          idm,
          idmn,
          id,
          idn,
          inverse_variance,
          max_prob,
          sum_entropy,
          sum_squares,
          mcc};
}

}  // namespace

std::vector<double> glcm_features(const DiscretePatch& dp) {
  std::array<std::vector<double>, 4> per_dir;
  for (std::size_t d = 0; d < kDirections2D.size(); ++d)
    per_dir[d] = glcm_features_one(
        glcm_matrix(dp, kDirections2D[d][0], kDirections2D[d][1]));
  return average_over_directions(per_dir);
}

// ---------------------------------------------------------------------------
// GLRLM
// ---------------------------------------------------------------------------

TextureMatrix glrlm_matrix(const DiscretePatch& dp, int dr, int dc) {
  check_patch(dp);
  const int max_run = std::max(dp.width, dp.height);
  TextureMatrix m;
  m.rows = dp.num_levels;
  m.cols = max_run;
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (int r = 0; r < dp.height; ++r)
    for (int c = 0; c < dp.width; ++c) {
      // Line starts: the predecessor along the direction is out of bounds.
      const int pr = r - dr, pc = c - dc;
      if (pr >= 0 && pr < dp.height && pc >= 0 && pc < dp.width) continue;
      int rr = r, cc = c;
      int level = dp.at(rr, cc), length = 0;
      while (rr >= 0 && rr < dp.height && cc >= 0 && cc < dp.width) {
        const int v = dp.at(rr, cc);
        if (v == level) {
          ++length;
        } else {
          m.at(level - 1, length - 1) += 1.0;
          level = v;
          length = 1;
        }
        rr += dr;
        cc += dc;
      }
      m.at(level - 1, length - 1) += 1.0;
    }
  return m;
}

namespace {

// Shared feature arithmetic for the three level-by-size count families
// (GLRLM runs, GLSZM zones, GLDM dependence columns). `counts` is
// Ng x max_size with size index j meaning size j+1; `np` is the pixel
// count used by the percentage feature (0 to skip it).
struct LevelSizeFeatures {
  double small_emphasis, large_emphasis, gln, glnn, sn, snn, percentage,
      gl_variance, size_variance, entropy, low_gl, high_gl, small_low,
      small_high, large_low, large_high;
};

LevelSizeFeatures level_size_features(const TextureMatrix& counts,
                                      double np) {
  const double total = counts.sum();
  if (total <= 0.0)
    fail(ErrorCode::DegenerateMatrix, "level/size family: empty matrix");
  LevelSizeFeatures f{};
  std::vector<double> by_level(counts.rows, 0.0), by_size(counts.cols, 0.0);
  double mu_level = 0.0, mu_size = 0.0;
  for (int i = 0; i < counts.rows; ++i)
    for (int j = 0; j < counts.cols; ++j) {
      const double v = counts.at(i, j);
      if (v == 0.0) continue;
      const double gi = i + 1, sj = j + 1;
      by_level[i] += v;
      by_size[j] += v;
      f.small_emphasis += v / (sj * sj);
      f.large_emphasis += v * sj * sj;
      f.low_gl += v / (gi * gi);
      f.high_gl += v * gi * gi;
      f.small_low += v / (gi * gi * sj * sj);
      f.small_high += v * gi * gi / (sj * sj);
      f.large_low += v * sj * sj / (gi * gi);
      f.large_high += v * gi * gi * sj * sj;
      const double p = v / total;
      mu_level += p * gi;
      mu_size += p * sj;
      f.entropy -= p * log2_safe(p);
    }
  for (int i = 0; i < counts.rows; ++i)
    for (int j = 0; j < counts.cols; ++j) {
      const double v = counts.at(i, j);
      if (v == 0.0) continue;
      const double p = v / total;
      f.gl_variance += p * (i + 1 - mu_level) * (i + 1 - mu_level);
      f.size_variance += p * (j + 1 - mu_size) * (j + 1 - mu_size);
    }
  for (double v : by_level) f.gln += v * v;
  for (double v : by_size) f.sn += v * v;
  f.small_emphasis /= total;
  f.large_emphasis /= total;
  f.low_gl /= total;
  f.high_gl /= total;
  f.small_low /= total;
  f.small_high /= total;
  f.large_low /= total;
  f.large_high /= total;
  f.glnn = f.gln / (total * total);
  f.gln /= total;
  f.snn = f.sn / (total * total);
  f.sn /= total;
  f.percentage = np > 0.0 ? total / np : 0.0;
  return f;
}

}  // namespace

std::vector<double> glrlm_features(const DiscretePatch& dp) {
  const double np = static_cast<double>(dp.levels.size());
  std::array<std::vector<double>, 4> per_dir;
  for (std::size_t d = 0; d < kDirections2D.size(); ++d) {
    const auto m = glrlm_matrix(dp, kDirections2D[d][0], kDirections2D[d][1]);
    const auto f = level_size_features(m, np);
    per_dir[d] = {f.small_emphasis, f.large_emphasis, f.gln, f.glnn,
                  f.sn, f.snn, f.percentage, f.gl_variance,
                  f.size_variance, f.entropy, f.low_gl, f.high_gl,
                  f.small_low, f.small_high, f.large_low, f.large_high};
  }
  return average_over_directions(per_dir);
}

// ---------------------------------------------------------------------------
// GLSZM
// ---------------------------------------------------------------------------

TextureMatrix glszm_matrix(const DiscretePatch& dp) {
  check_patch(dp);
  const std::size_t n = dp.levels.size();
  std::vector<char> visited(n, 0);
  std::vector<std::pair<int, std::size_t>> zones;  // (level, size)
  std::vector<std::size_t> stack;
  std::size_t max_size = 1;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    const int level = dp.levels[start];
    std::size_t size = 0;
    stack.assign(1, start);
    visited[start] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      ++size;
      const int r = static_cast<int>(cur) / dp.width;
      const int c = static_cast<int>(cur) % dp.width;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= dp.height || cc < 0 || cc >= dp.width) continue;
          const std::size_t ni = static_cast<std::size_t>(rr) * dp.width + cc;
          if (visited[ni] || dp.levels[ni] != level) continue;
          visited[ni] = 1;
          stack.push_back(ni);
        }
    }
    zones.emplace_back(level, size);
    max_size = std::max(max_size, size);
  }
  TextureMatrix m;
  m.rows = dp.num_levels;
  m.cols = static_cast<int>(max_size);
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (const auto& [level, size] : zones)
    m.at(level - 1, static_cast<int>(size) - 1) += 1.0;
  return m;
}

std::vector<double> glszm_features(const DiscretePatch& dp) {
  const auto m = glszm_matrix(dp);
  const auto f = level_size_features(m, static_cast<double>(dp.levels.size()));
  return {f.small_emphasis, f.large_emphasis, f.gln, f.glnn,
          f.sn, f.snn, f.percentage, f.gl_variance,
          f.size_variance, f.entropy, f.low_gl, f.high_gl,
          f.small_low, f.small_high, f.large_low, f.large_high};
}

// ---------------------------------------------------------------------------
// GLDM
// ---------------------------------------------------------------------------

TextureMatrix gldm_matrix(const DiscretePatch& dp) {
  check_patch(dp);
  TextureMatrix m;
  m.rows = dp.num_levels;
  m.cols = 9;  // dependence counts 0..8 stored at column (count)
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  for (int r = 0; r < dp.height; ++r)
    for (int c = 0; c < dp.width; ++c) {
      const int level = dp.at(r, c);
      int dependence = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= dp.height || cc < 0 || cc >= dp.width) continue;
          if (dp.at(rr, cc) == level) ++dependence;  // alpha = 0
        }
      m.at(level - 1, dependence) += 1.0;
    }
  return m;
}

std::vector<double> gldm_features(const DiscretePatch& dp) {
  const auto m = gldm_matrix(dp);
  // Dependence count k occupies column k; the size index used in the
  // emphasis weights is k+1, which level_size_features already applies.
  const auto f = level_size_features(m, 0.0);
  return {f.small_emphasis, f.large_emphasis, f.gln, f.sn, f.snn,
          f.gl_variance, f.size_variance, f.entropy, f.low_gl, f.high_gl,
          f.small_low, f.small_high, f.large_low, f.large_high};
}

// ---------------------------------------------------------------------------
// NGTDM
// ---------------------------------------------------------------------------

NgtdmTable ngtdm_table(const DiscretePatch& dp) {
  check_patch(dp);
  NgtdmTable t;
  t.n.assign(static_cast<std::size_t>(dp.num_levels), 0.0);
  t.s.assign(static_cast<std::size_t>(dp.num_levels), 0.0);
  t.pixel_count = dp.levels.size();
  for (int r = 0; r < dp.height; ++r)
    for (int c = 0; c < dp.width; ++c) {
      double acc = 0.0;
      int count = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= dp.height || cc < 0 || cc >= dp.width) continue;
          acc += dp.at(rr, cc);
          ++count;
        }
      const int level = dp.at(r, c);
      t.n[static_cast<std::size_t>(level - 1)] += 1.0;
      if (count > 0)
        t.s[static_cast<std::size_t>(level - 1)] +=
            std::abs(level - acc / count);
    }
  return t;
}

std::vector<double> ngtdm_features(const DiscretePatch& dp) {
  const auto t = ngtdm_table(dp);
  const double np = static_cast<double>(t.pixel_count);
  const int ng = static_cast<int>(t.n.size());

  std::vector<int> present;
  for (int i = 0; i < ng; ++i)
    if (t.n[i] > 0.0) present.push_back(i);
  const double ngp = static_cast<double>(present.size());

  double ps_sum = 0.0, s_sum = 0.0;
  for (int i : present) {
    ps_sum += t.n[i] / np * t.s[i];
    s_sum += t.s[i];
  }

  const double coarseness = ps_sum > 0.0 ? 1.0 / ps_sum : 1e6;

  double contrast = 0.0;
  if (present.size() > 1) {
    double pair_sum = 0.0;
    for (int i : present)
      for (int j : present) {
        const double d = i - j;
        pair_sum += t.n[i] / np * t.n[j] / np * d * d;
      }
    contrast = pair_sum / (ngp * (ngp - 1.0)) * (s_sum / np);
  }

  double busy_denom = 0.0;
  for (int i : present)
    for (int j : present)
      busy_denom += std::abs((i + 1) * t.n[i] / np - (j + 1) * t.n[j] / np);
  const double busyness = busy_denom > 0.0 ? ps_sum / busy_denom : 0.0;

  double complexity = 0.0;
  for (int i : present)
    for (int j : present) {
      const double pi = t.n[i] / np, pj = t.n[j] / np;
      complexity +=
          std::abs(i - j) * (pi * t.s[i] + pj * t.s[j]) / (pi + pj);
    }
  complexity /= np;

  double strength = 0.0;
  if (s_sum > 0.0) {
    for (int i : present)
      for (int j : present) {
        const double d = i - j;
        strength += (t.n[i] / np + t.n[j] / np) * d * d;
      }
    strength /= s_sum;
  }

  return {coarseness, contrast, busyness, complexity, strength};
}

// ---------------------------------------------------------------------------
// assembly
// ---------------------------------------------------------------------------

std::vector<double> image_features(const GrayImage& img, int num_levels) {
  std::vector<double> out;
  out.reserve(kFeaturesPerImage);
  auto append = [&out](const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
  };
  append(first_order(img.values(), img.pixel_area_mm2(), num_levels));
  const DiscretePatch dp = quantize(img, num_levels);
  append(glcm_features(dp));
  append(glrlm_features(dp));
  append(glszm_features(dp));
  append(gldm_features(dp));
  append(ngtdm_features(dp));
  return out;
}

std::vector<double> optomic_vector(const GrayImage& patch,
                                   const std::vector<FilterSpec>& bank,
                                   int num_levels) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(kFeaturesPerImage) * (1 + bank.size()));
  const auto original = image_features(patch, num_levels);
  out.insert(out.end(), original.begin(), original.end());
  for (const auto& spec : bank) {
    const GrayImage filtered = apply_filter(patch, spec);
    const auto feats = image_features(filtered, num_levels);
    out.insert(out.end(), feats.begin(), feats.end());
  }
  return out;
}

std::vector<std::string> feature_names(const std::vector<FilterSpec>& bank) {
  std::vector<std::string> images = {"original"};
  for (const auto& spec : bank) images.push_back(spec.name);
  std::vector<std::string> out;
  out.reserve(images.size() * kFeaturesPerImage);
  for (const auto& image : images) {
    for (const auto& f : first_order_names())
      out.push_back(image + "_firstorder_" + f);
    for (const auto& f : glcm_names()) out.push_back(image + "_glcm_" + f);
    for (const auto& f : glrlm_names()) out.push_back(image + "_glrlm_" + f);
    for (const auto& f : glszm_names()) out.push_back(image + "_glszm_" + f);
    for (const auto& f : gldm_names()) out.push_back(image + "_gldm_" + f);
    for (const auto& f : ngtdm_names()) out.push_back(image + "_ngtdm_" + f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// feature table
// ---------------------------------------------------------------------------

std::vector<int> FeatureTable::labels() const {
  std::vector<int> out(meta.size());
  for (std::size_t i = 0; i < meta.size(); ++i) out[i] = meta[i].label;
  return out;
}

std::vector<std::string> FeatureTable::slice_ids() const {
  std::vector<std::string> out(meta.size());
  for (std::size_t i = 0; i < meta.size(); ++i) out[i] = meta[i].slice_id;
  return out;
}

std::vector<std::size_t> FeatureTable::rows_of_slices(
    const std::vector<std::string>& ids, bool invert) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < meta.size(); ++r) {
    const bool member =
        std::find(ids.begin(), ids.end(), meta[r].slice_id) != ids.end();
    if (member != invert) out.push_back(r);
  }
  return out;
}

FeatureTable FeatureTable::subset(
    const std::vector<std::size_t>& row_indices) const {
  FeatureTable out;
  out.names = names;
  out.meta.reserve(row_indices.size());
  out.values.reserve(row_indices.size() * cols());
  for (std::size_t r : row_indices) {
    out.meta.push_back(meta[r]);
    out.values.insert(out.values.end(), row(r), row(r) + cols());
  }
  return out;
}

namespace {
const std::vector<std::string> kMetaColumns = {
    "slice_id", "patient_id", "dose_group", "patch_id",
    "center_x_px", "center_y_px", "size_mm", "label"};
}

void write_feature_csv(const std::string& path, const FeatureTable& table,
                       std::uint32_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  char hash_line[32];
  std::snprintf(hash_line, sizeof(hash_line), "# config_hash=%08x\n",
                config_hash);
  out << hash_line;
  for (std::size_t i = 0; i < kMetaColumns.size(); ++i)
    out << (i ? "," : "") << kMetaColumns[i];
  for (const auto& name : table.names) out << "," << name;
  out << "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto& m = table.meta[r];
    out << m.slice_id << "," << m.patient_id << "," << m.dose_group << ","
        << m.patch_id << "," << m.center_col_px << "," << m.center_row_px
        << "," << format_real(m.size_mm) << "," << m.label;
    const double* row = table.row(r);
    for (std::size_t c = 0; c < table.cols(); ++c)
      out << "," << format_real(row[c]);
    out << "\n";
  }
}

FeatureTable read_feature_csv(const std::string& path,
                              std::uint32_t& config_hash) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# config_hash=", 0) != 0)
    fail(ErrorCode::BadFormat, "'" + path + "': missing config hash line");
  config_hash =
      static_cast<std::uint32_t>(std::stoul(line.substr(14), nullptr, 16));
  if (!std::getline(in, line))
    fail(ErrorCode::BadFormat, "'" + path + "': missing header");
  const auto header = split_csv_line(line);
  if (header.size() < kMetaColumns.size() + 1)
    fail(ErrorCode::BadFormat, "'" + path + "': header too short");
  for (std::size_t i = 0; i < kMetaColumns.size(); ++i)
    if (header[i] != kMetaColumns[i])
      fail(ErrorCode::BadFormat, "'" + path + "': unexpected metadata column");
  FeatureTable table;
  table.names.assign(header.begin() + kMetaColumns.size(), header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      fail(ErrorCode::BadFormat, "'" + path + "': row width mismatch");
    PatchMeta m;
    m.slice_id = fields[0];
    m.patient_id = fields[1];
    m.dose_group = std::stoi(fields[2]);
    m.patch_id = std::stoi(fields[3]);
    m.center_col_px = std::stoi(fields[4]);
    m.center_row_px = std::stoi(fields[5]);
    m.size_mm = std::stod(fields[6]);
    m.label = std::stoi(fields[7]);
    table.meta.push_back(std::move(m));
    for (std::size_t c = kMetaColumns.size(); c < fields.size(); ++c)
      table.values.push_back(std::stod(fields[c]));
  }
  return table;
}

}  // namespace optomx

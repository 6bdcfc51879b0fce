#include "optomx/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "optomx/csv.hpp"
#include "optomx/error.hpp"

namespace optomx {
namespace {

// Continued fraction for the incomplete beta (modified Lentz iteration).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-12;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    fail(ErrorCode::BadConfig, "incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) fail(ErrorCode::BadConfig, "student_t: df must be >= 1");
  if (!std::isfinite(t)) return 0.0;
  const double d = static_cast<double>(df);
  return incomplete_beta(0.5 * d, 0.5, d / (d + t * t));
}

PairedTestResult paired_ttest(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size())
    fail(ErrorCode::LengthMismatch, "paired_ttest: unequal lengths");
  const std::size_t n = a.size();
  if (n < 2) fail(ErrorCode::LengthMismatch, "paired_ttest: need n >= 2");

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  PairedTestResult result;
  result.degrees_of_freedom = static_cast<int>(n) - 1;
  result.mean_difference = mean;
  if (sd == 0.0) {
    if (mean == 0.0) {
      result.t_statistic = 0.0;
      result.p_value = 1.0;
    } else {
      // All differences identical and nonzero: the statistic diverges.
      result.t_statistic = mean > 0.0
                               ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
      result.degenerate = true;
    }
    return result;
  }
  result.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.p_value =
      student_t_two_sided_p(result.t_statistic, result.degrees_of_freedom);
  return result;
}

namespace {

void check_comparison(const MethodComparison& cmp) {
  if (cmp.slice_ids.empty() ||
      cmp.slice_ids.size() != cmp.threshold_accuracy.size() ||
      cmp.slice_ids.size() != cmp.optomics_accuracy.size())
    fail(ErrorCode::MissingMetrics,
         "report: per-slice metric lists missing or misaligned");
}

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

std::string build_report_text(const MethodComparison& cmp,
                              std::uint32_t config_hash) {
  check_comparison(cmp);
  const PairedTestResult test =
      paired_ttest(cmp.optomics_accuracy, cmp.threshold_accuracy);
  const double mean_thr = mean_of(cmp.threshold_accuracy);
  const double mean_opt = mean_of(cmp.optomics_accuracy);

  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "# config_hash=%08x\n", config_hash);
  out += line;
  out += "Per-slice test accuracy: intensity thresholding vs optomics\n\n";
  out += "slice_id        thresholding   optomics   difference\n";
  for (std::size_t i = 0; i < cmp.slice_ids.size(); ++i) {
    std::snprintf(line, sizeof(line), "%-15s %12.4f %10.4f %+11.4f\n",
                  cmp.slice_ids[i].c_str(), cmp.threshold_accuracy[i],
                  cmp.optomics_accuracy[i],
                  cmp.optomics_accuracy[i] - cmp.threshold_accuracy[i]);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-15s %12.4f %10.4f %+11.4f\n", "mean",
                mean_thr, mean_opt, mean_opt - mean_thr);
  out += line;
  std::snprintf(line, sizeof(line),
                "\npaired two-sided t-test: t = %.6g, df = %d, p = %.6g%s\n",
                test.t_statistic, test.degrees_of_freedom, test.p_value,
                test.degenerate ? " (degenerate: zero-variance differences)"
                                : "");
  out += line;
  out +=
      "\nClinical reference benchmark (private dataset, not reproducible "
      "here): mean accuracy 89% vs 81%, P = 0.0072.\n";
  return out;
}

std::string build_report_csv(const MethodComparison& cmp,
                             std::uint32_t config_hash) {
  check_comparison(cmp);
  const PairedTestResult test =
      paired_ttest(cmp.optomics_accuracy, cmp.threshold_accuracy);

  char line[64];
  std::snprintf(line, sizeof(line), "# config_hash=%08x\n", config_hash);
  std::string out = line;
  out += "slice_id,threshold_accuracy,optomics_accuracy,difference\n";
  for (std::size_t i = 0; i < cmp.slice_ids.size(); ++i) {
    out += cmp.slice_ids[i] + "," + format_real(cmp.threshold_accuracy[i]) +
           "," + format_real(cmp.optomics_accuracy[i]) + "," +
           format_real(cmp.optomics_accuracy[i] - cmp.threshold_accuracy[i]) +
           "\n";
  }
  out += "mean," + format_real(mean_of(cmp.threshold_accuracy)) + "," +
         format_real(mean_of(cmp.optomics_accuracy)) + "," +
         format_real(mean_of(cmp.optomics_accuracy) -
                     mean_of(cmp.threshold_accuracy)) +
         "\n";
  out += "t_statistic," + format_real(test.t_statistic) + ",,\n";
  out += "degrees_of_freedom," + std::to_string(test.degrees_of_freedom) +
         ",,\n";
  out += "p_value," + format_real(test.p_value) + ",,\n";
  return out;
}

}  // namespace optomx

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace optomx {

struct PairedTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
  double mean_difference = 0.0;
  // Set when sd(d) = 0 with a nonzero mean; p is reported as 0 by
  // convention instead of fabricating a finite tail.
  bool degenerate = false;
};

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation to
// 1e-12. Exposed because the t-test tail is computed through it.
double incomplete_beta(double a, double b, double x);

// Two-sided Student-t tail probability for the given t and df.
double student_t_two_sided_p(double t, int df);

// Two-sided paired t-test with sample (n-1) SD on the differences.
PairedTestResult paired_ttest(const std::vector<double>& a,
                              const std::vector<double>& b);

// Per-slice accuracy of both methods on the shared test slices.
struct MethodComparison {
  std::vector<std::string> slice_ids;
  std::vector<double> threshold_accuracy;
  std::vector<double> optomics_accuracy;
};

// Human-readable report and its machine-readable CSV twin; byte-stable for
// identical inputs.
std::string build_report_text(const MethodComparison& cmp,
                              std::uint32_t config_hash);
std::string build_report_csv(const MethodComparison& cmp,
                             std::uint32_t config_hash);

}  // namespace optomx

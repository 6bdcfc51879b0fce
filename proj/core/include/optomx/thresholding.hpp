#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// Pixel-level intensity baseline: tumor is predicted wherever the
// standardized value is >= the threshold.
struct RocCurve {
  std::vector<double> thresholds;  // ascending; sentinels below min, above max
  std::vector<double> tpr;
  std::vector<double> fpr;
  std::vector<double> accuracy;
};

struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

// Candidate thresholds are the midpoints between consecutive sorted unique
// values plus one sentinel below the minimum and one above the maximum.
// Throws SingleClass when only one label is present.
RocCurve roc_curve(const std::vector<double>& values,
                   const std::vector<int>& labels);

// Threshold maximizing training accuracy; ties resolve to the lowest
// threshold (the sensitive side).
double optimal_cutoff(const RocCurve& roc);

struct PixelClassification {
  std::vector<std::uint8_t> mask;  // 1 = predicted tumor, tissue pixels only
  ConfusionMatrix confusion;
};

// Applies the cutoff to every normal/tumor pixel of a standardized slice;
// background and calibration pixels are ignored.
PixelClassification classify_pixels(const LabeledSlice& slice,
                                    const GrayImage& standardized, double ocp);

// Ratios with zero denominators are reported absent, never as 0.
struct ConfusionMetrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> fnr;
  std::optional<double> fpr;
};

ConfusionMetrics confusion_metrics(const ConfusionMatrix& cm);

}  // namespace optomx

#include "optomx/thresholding.hpp"

#include <algorithm>

#include "optomx/error.hpp"

namespace optomx {

RocCurve roc_curve(const std::vector<double>& values,
                   const std::vector<int>& labels) {
  if (values.size() != labels.size() || values.empty())
    fail(ErrorCode::LengthMismatch, "roc_curve: values/labels mismatch");
  std::uint64_t pos = 0;
  for (int v : labels) pos += static_cast<std::uint64_t>(v != 0);
  const std::uint64_t neg = values.size() - pos;
  if (pos == 0 || neg == 0)
    fail(ErrorCode::SingleClass, "roc_curve: both classes required");

  // Sorted (value, label) pairs; suffix counts give TP/FP per threshold.
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  std::vector<double> unique_vals;
  unique_vals.reserve(values.size());
  for (std::size_t i : order)
    if (unique_vals.empty() || values[i] != unique_vals.back())
      unique_vals.push_back(values[i]);

  RocCurve roc;
  roc.thresholds.reserve(unique_vals.size() + 1);
  roc.thresholds.push_back(unique_vals.front() - 1.0);
  for (std::size_t i = 0; i + 1 < unique_vals.size(); ++i)
    roc.thresholds.push_back(0.5 * (unique_vals[i] + unique_vals[i + 1]));
  roc.thresholds.push_back(unique_vals.back() + 1.0);

  const double n = static_cast<double>(values.size());
  std::size_t below = 0;  // entries of `order` with value < threshold
  std::uint64_t pos_below = 0;
  for (double t : roc.thresholds) {
    while (below < order.size() && values[order[below]] < t) {
      pos_below += static_cast<std::uint64_t>(labels[order[below]] != 0);
      ++below;
    }
    const std::uint64_t tp = pos - pos_below;
    const std::uint64_t fp = (order.size() - below) - tp;
    roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    const std::uint64_t tn = neg - fp;
    roc.accuracy.push_back(static_cast<double>(tp + tn) / n);
  }
  return roc;
}

double optimal_cutoff(const RocCurve& roc) {
  if (roc.thresholds.empty())
    fail(ErrorCode::EmptyMatrix, "optimal_cutoff: empty curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < roc.thresholds.size(); ++i)
    if (roc.accuracy[i] > roc.accuracy[best]) best = i;  // ties keep lowest
  return roc.thresholds[best];
}

PixelClassification classify_pixels(const LabeledSlice& slice,
                                    const GrayImage& standardized,
                                    double ocp) {
  if (!slice.image.same_shape(standardized))
    fail(ErrorCode::ShapeMismatch, "classify_pixels: shape mismatch");
  PixelClassification out;
  out.mask.assign(standardized.size(), 0);
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    const std::uint8_t label = slice.labels[i];
    if (label != kNormal && label != kTumor) continue;
    const bool predicted_tumor = standardized[i] >= ocp;
    out.mask[i] = predicted_tumor ? 1 : 0;
    if (label == kTumor)
      (predicted_tumor ? out.confusion.tp : out.confusion.fn) += 1;
    else
      (predicted_tumor ? out.confusion.fp : out.confusion.tn) += 1;
  }
  return out;
}

ConfusionMetrics confusion_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0)
    fail(ErrorCode::EmptyMatrix, "confusion_metrics: empty matrix");
  ConfusionMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) /
               static_cast<double>(cm.total());
  if (cm.tp + cm.fn > 0) {
    m.sensitivity = static_cast<double>(cm.tp) /
                    static_cast<double>(cm.tp + cm.fn);
    m.fnr = static_cast<double>(cm.fn) / static_cast<double>(cm.tp + cm.fn);
  }
  if (cm.tn + cm.fp > 0) {
    m.specificity = static_cast<double>(cm.tn) /
                    static_cast<double>(cm.tn + cm.fp);
    m.fpr = static_cast<double>(cm.fp) / static_cast<double>(cm.tn + cm.fp);
  }
  return m;
}

}  // namespace optomx

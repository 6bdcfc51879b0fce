#include "optomx/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace optomx {

GrayImage GrayImage::crop(int center_row, int center_col, int size) const {
  const int half = size / 2;
  const int r0 = center_row - half;
  const int c0 = center_col - half;
  if (r0 < 0 || c0 < 0 || r0 + size > height_ || c0 + size > width_)
    fail(ErrorCode::ShapeMismatch, "crop: patch footprint out of bounds");
  GrayImage out(size, size, pitch_);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c)
      out.at(r, c) = at(r0 + r, c0 + c);
  return out;
}

void LabeledSlice::validate(bool require_tissue) const {
  if (labels.size() != image.size())
    fail(ErrorCode::ShapeMismatch,
         "slice '" + slice_id + "': label mask shape differs from image");
  for (std::uint8_t v : labels)
    if (v > kCalibration)
      fail(ErrorCode::BadFormat,
           "slice '" + slice_id + "': label value out of {0,1,2,3}");
  if (require_tissue) {
    const bool has_tissue =
        std::any_of(labels.begin(), labels.end(),
                    [](std::uint8_t v) { return v == kNormal || v == kTumor; });
    if (!has_tissue)
      fail(ErrorCode::EmptyRoi,
           "slice '" + slice_id + "': no pixel labeled normal or tumor");
  }
  if (dose_group < 1 || dose_group > 3)
    fail(ErrorCode::BadFormat, "slice '" + slice_id + "': dose_group out of range");
}

GrayImage background_subtract(const GrayImage& img, double background_mean) {
  if (!std::isfinite(background_mean))
    fail(ErrorCode::NonFiniteInput, "background_subtract: mean not finite");
  GrayImage out = img;
  for (auto& v : out.values()) v = std::max(v - background_mean, 0.0);
  return out;
}

double mask_mean(const GrayImage& img, const std::vector<std::size_t>& mask) {
  if (mask.empty()) fail(ErrorCode::ZeroCalibration, "mask_mean: empty pixel set");
  double sum = 0.0;
  for (std::size_t i : mask) sum += img[i];
  return sum / static_cast<double>(mask.size());
}

GrayImage calibrate(const GrayImage& img, const std::vector<std::size_t>& calib_mask) {
  if (calib_mask.empty())
    fail(ErrorCode::ZeroCalibration, "calibrate: empty calibration mask");
  const double mean = mask_mean(img, calib_mask);
  if (!(mean > 0.0))
    fail(ErrorCode::ZeroCalibration, "calibrate: calibration mean <= 0");
  GrayImage out = img;
  for (auto& v : out.values()) v /= mean;
  return out;
}

GrayImage normalize_unit_range(const GrayImage& img) {
  const auto [mn_it, mx_it] =
      std::minmax_element(img.values().begin(), img.values().end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx == mn)
    fail(ErrorCode::ConstantImage, "normalize_unit_range: constant image");
  const double span = mx - mn;
  GrayImage out = img;
  for (auto& v : out.values()) v = (v - mn) / span;
  // Guarantee the exact endpoints regardless of rounding.
  for (auto& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::vector<std::size_t> label_mask(const LabeledSlice& slice, std::uint8_t label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slice.labels.size(); ++i)
    if (slice.labels[i] == label) out.push_back(i);
  return out;
}

GrayImage standardize(const LabeledSlice& slice) {
  const auto background = label_mask(slice, kBackground);
  const auto calib = label_mask(slice, kCalibration);
  GrayImage img = slice.image;
  if (!background.empty())
    img = background_subtract(img, mask_mean(img, background));
  if (!calib.empty()) img = calibrate(img, calib);
  return normalize_unit_range(img);
}

DiscretePatch quantize(const std::vector<double>& values, int width, int height,
                       int num_levels) {
  if (num_levels < 2)
    fail(ErrorCode::BadBinCount, "quantize: need at least 2 gray levels");
  DiscretePatch dp;
  dp.width = width;
  dp.height = height;
  dp.num_levels = num_levels;
  dp.levels.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int level =
        static_cast<int>(std::floor(values[i] * num_levels)) + 1;
    dp.levels[i] = std::clamp(level, 1, num_levels);
  }
  return dp;
}

DiscretePatch quantize(const GrayImage& patch, int num_levels) {
  return quantize(patch.values(), patch.width(), patch.height(), num_levels);
}

}  // namespace optomx

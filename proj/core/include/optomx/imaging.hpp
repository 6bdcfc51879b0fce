#pragma once

#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// Standardization steps applied to every slice before analysis:
// background subtraction, calibration-target normalization, rescale to
// [0,1]. All pure functions; shape and pitch are preserved.

// out = max(img - background_mean, 0). Negative counts clamp to zero.
GrayImage background_subtract(const GrayImage& img, double background_mean);

// Mean of img over a pixel set (indices into the flat value array).
double mask_mean(const GrayImage& img, const std::vector<std::size_t>& mask);

// out = img / mean(img over calib_mask). Throws ZeroCalibration when the
// mask is empty or the calibration mean is not positive.
GrayImage calibrate(const GrayImage& img, const std::vector<std::size_t>& calib_mask);

// Affine rescale so min(out) = 0 and max(out) = 1 exactly. Throws
// ConstantImage when max == min.
GrayImage normalize_unit_range(const GrayImage& img);

// Convenience: flat indices of pixels carrying `label` in the mask.
std::vector<std::size_t> label_mask(const LabeledSlice& slice, std::uint8_t label);

// Full chain on a labeled slice: subtract the mean over background pixels,
// normalize by the calibration-region mean, rescale to [0,1].
GrayImage standardize(const LabeledSlice& slice);

// Fixed-bin-count discretization of values in [0,1]:
// level(v) = min(floor(v * Ng) + 1, Ng). Out-of-range values clamp into
// [1, Ng]. Throws BadBinCount when Ng < 2.
DiscretePatch quantize(const GrayImage& patch, int num_levels);
DiscretePatch quantize(const std::vector<double>& values, int width, int height,
                       int num_levels);

}  // namespace optomx

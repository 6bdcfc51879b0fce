#pragma once

#include <string>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// One patch is expanded to 16 images: the original plus the 15 filter
// outputs below. Canonical filter names appear verbatim in feature CSV
// column headers.
enum class FilterKind {
  WaveletLL,
  WaveletLH,
  WaveletHL,
  WaveletHH,
  LoG,
  Square,
  SquareRoot,
  Logarithm,
  Exponential,
  Gradient,
  Lbp2D,
};

struct FilterSpec {
  FilterKind kind;
  double sigma_mm = 0.0;  // LoG only
  std::string name;       // canonical, e.g. "wavelet-LL", "log-sigma-1.5"
};

// The 15-filter default bank, in canonical order: 4 Haar wavelet subbands,
// 5 Laplacian-of-Gaussian scales, then square, squareroot, logarithm,
// exponential, gradient, lbp-2D.
std::vector<FilterSpec> default_bank(
    const std::vector<double>& log_sigmas_mm = {0.5, 1.0, 1.5, 2.0, 2.5});

// Filter response before range normalization. Input values are expected in
// [0,1]; wavelet and LoG filters require patch sides of at least 4 pixels
// (PatchTooSmall otherwise).
GrayImage apply_filter_raw(const GrayImage& patch, const FilterSpec& spec);

// Raw response rescaled to [0,1]; a constant response passes through as
// all zeros so downstream quantization always sees a defined range.
GrayImage apply_filter(const GrayImage& patch, const FilterSpec& spec);

// Rescale helper shared with feature extraction.
GrayImage rescale_unit_or_zero(const GrayImage& img);

// Single-level 2D Haar decomposition with mean-preserving normalization
// (LL of a constant c is c), subbands upsampled back to full resolution by
// nearest neighbor. Exposed for testing the subband invariants.
enum class HaarSubband { LL, LH, HL, HH };
GrayImage haar_subband_image(const GrayImage& patch, HaarSubband subband);

// Discrete LoG kernel as separable 1D factors; the second-derivative
// factor is normalized to sum exactly to zero, which makes the effective
// 2D kernel zero-sum.
struct LogKernel1D {
  std::vector<double> gauss;        // plain Gaussian factor
  std::vector<double> second_deriv; // zero-sum second-derivative factor
};
LogKernel1D make_log_kernel(double sigma_px);

}  // namespace optomx

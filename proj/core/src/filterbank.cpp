#include "optomx/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace optomx {
namespace {

// Symmetric (half-sample) mirror extension, valid for offsets of any size.
int mirror_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

// Separable convolution passes with mirror padding. Kernel is centered.
void convolve_rows(const GrayImage& in, const std::vector<double>& kernel,
                   GrayImage& out) {
  const int n = static_cast<int>(kernel.size());
  const int half = n / 2;
  for (int r = 0; r < in.height(); ++r)
    for (int c = 0; c < in.width(); ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += kernel[k] * in.at(r, mirror_index(c + k - half, in.width()));
      out.at(r, c) = acc;
    }
}

void convolve_cols(const GrayImage& in, const std::vector<double>& kernel,
                   GrayImage& out) {
  const int n = static_cast<int>(kernel.size());
  const int half = n / 2;
  for (int r = 0; r < in.height(); ++r)
    for (int c = 0; c < in.width(); ++c) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k)
        acc += kernel[k] * in.at(mirror_index(r + k - half, in.height()), c);
      out.at(r, c) = acc;
    }
}

GrayImage separable_convolve(const GrayImage& in,
                             const std::vector<double>& row_kernel,
                             const std::vector<double>& col_kernel) {
  GrayImage tmp(in.width(), in.height(), in.pixel_pitch_mm());
  GrayImage out(in.width(), in.height(), in.pixel_pitch_mm());
  convolve_rows(in, row_kernel, tmp);
  convolve_cols(tmp, col_kernel, out);
  return out;
}

void require_min_side(const GrayImage& patch, const std::string& name) {
  if (patch.width() < 4 || patch.height() < 4)
    fail(ErrorCode::PatchTooSmall,
         name + ": patch side must be >= 4 pixels, got " +
             std::to_string(patch.width()) + "x" + std::to_string(patch.height()));
}

GrayImage pointwise(const GrayImage& patch, double (*fn)(double)) {
  GrayImage out = patch;
  for (auto& v : out.values()) v = fn(v);
  return out;
}

GrayImage gradient_magnitude(const GrayImage& patch) {
  GrayImage out(patch.width(), patch.height(), patch.pixel_pitch_mm());
  for (int r = 0; r < patch.height(); ++r)
    for (int c = 0; c < patch.width(); ++c) {
      const double gx = 0.5 * (patch.at(r, mirror_index(c + 1, patch.width())) -
                               patch.at(r, mirror_index(c - 1, patch.width())));
      const double gy = 0.5 * (patch.at(mirror_index(r + 1, patch.height()), c) -
                               patch.at(mirror_index(r - 1, patch.height()), c));
      out.at(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  return out;
}

// Rotation-invariant uniform LBP over the 8 adjacent neighbors in circular
// order. Uniform patterns (at most two 0/1 transitions) map to their
// one-count 0..8; the rest share code 9.
GrayImage lbp_riu2(const GrayImage& patch) {
  static constexpr int dr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  static constexpr int dc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  GrayImage out(patch.width(), patch.height(), patch.pixel_pitch_mm());
  for (int r = 0; r < patch.height(); ++r)
    for (int c = 0; c < patch.width(); ++c) {
      const double center = patch.at(r, c);
      int bits[8];
      for (int k = 0; k < 8; ++k) {
        const int rr = mirror_index(r + dr[k], patch.height());
        const int cc = mirror_index(c + dc[k], patch.width());
        bits[k] = patch.at(rr, cc) >= center ? 1 : 0;
      }
      int transitions = 0, ones = 0;
      for (int k = 0; k < 8; ++k) {
        transitions += bits[k] != bits[(k + 1) % 8];
        ones += bits[k];
      }
      out.at(r, c) = transitions <= 2 ? static_cast<double>(ones) : 9.0;
    }
  return out;
}

// Pairwise (a,b) decomposition of one line; odd lengths replicate the last
// sample. low = (a+b)/2, high = (a-b)/2.
void haar_split(const std::vector<double>& line, std::vector<double>& low,
                std::vector<double>& high) {
  const int n = static_cast<int>(line.size());
  const int half = (n + 1) / 2;
  low.resize(half);
  high.resize(half);
  for (int k = 0; k < half; ++k) {
    const double a = line[2 * k];
    const double b = line[std::min(2 * k + 1, n - 1)];
    low[k] = 0.5 * (a + b);
    high[k] = 0.5 * (a - b);
  }
}

}  // namespace

GrayImage haar_subband_image(const GrayImage& patch, HaarSubband subband) {
  const bool row_high = subband == HaarSubband::HL || subband == HaarSubband::HH;
  const bool col_high = subband == HaarSubband::LH || subband == HaarSubband::HH;
  // Subband naming: first letter = column (horizontal) filter, second =
  // row (vertical) filter, so LH is horizontal-low / vertical-high detail.

  const int sub_w = (patch.width() + 1) / 2;
  const int sub_h = (patch.height() + 1) / 2;

  // Pass 1: along rows.
  GrayImage half_w(sub_w, patch.height(), patch.pixel_pitch_mm());
  std::vector<double> line, low, high;
  for (int r = 0; r < patch.height(); ++r) {
    line.assign(patch.values().begin() + static_cast<std::size_t>(r) * patch.width(),
                patch.values().begin() +
                    static_cast<std::size_t>(r + 1) * patch.width());
    haar_split(line, low, high);
    const auto& pick = col_high ? high : low;
    for (int c = 0; c < sub_w; ++c) half_w.at(r, c) = pick[c];
  }

  // Pass 2: along columns.
  GrayImage sub(sub_w, sub_h, patch.pixel_pitch_mm());
  for (int c = 0; c < sub_w; ++c) {
    line.resize(patch.height());
    for (int r = 0; r < patch.height(); ++r) line[r] = half_w.at(r, c);
    haar_split(line, low, high);
    const auto& pick = row_high ? high : low;
    for (int r = 0; r < sub_h; ++r) sub.at(r, c) = pick[r];
  }

  // Nearest-neighbor upsample back to the patch resolution.
  GrayImage out(patch.width(), patch.height(), patch.pixel_pitch_mm());
  for (int r = 0; r < patch.height(); ++r)
    for (int c = 0; c < patch.width(); ++c)
      out.at(r, c) = sub.at(std::min(r / 2, sub_h - 1), std::min(c / 2, sub_w - 1));
  return out;
}

LogKernel1D make_log_kernel(double sigma_px) {
  if (!(sigma_px > 0.0))
    fail(ErrorCode::BadConfig, "LoG sigma must be positive");
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
  LogKernel1D k;
  k.gauss.resize(2 * radius + 1);
  k.second_deriv.resize(2 * radius + 1);
  const double s2 = sigma_px * sigma_px;
  double gauss_sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double g = std::exp(-0.5 * i * i / s2);
    k.gauss[i + radius] = g;
    k.second_deriv[i + radius] = (i * i / s2 - 1.0) / s2 * g;
    gauss_sum += g;
  }
  for (auto& v : k.gauss) v /= gauss_sum;
  // Force the derivative factor to zero sum; with it, the effective 2D
  // kernel G''(x)G(y) + G(x)G''(y) sums to zero as well.
  double d_sum = 0.0;
  for (double v : k.second_deriv) d_sum += v;
  const double shift = d_sum / static_cast<double>(k.second_deriv.size());
  for (auto& v : k.second_deriv) v -= shift;
  return k;
}

std::vector<FilterSpec> default_bank(const std::vector<double>& log_sigmas_mm) {
  std::vector<FilterSpec> bank;
  bank.push_back({FilterKind::WaveletLL, 0.0, "wavelet-LL"});
  bank.push_back({FilterKind::WaveletLH, 0.0, "wavelet-LH"});
  bank.push_back({FilterKind::WaveletHL, 0.0, "wavelet-HL"});
  bank.push_back({FilterKind::WaveletHH, 0.0, "wavelet-HH"});
  for (double s : log_sigmas_mm) {
    char name[48];
    std::snprintf(name, sizeof(name), "log-sigma-%.1f", s);
    bank.push_back({FilterKind::LoG, s, name});
  }
  bank.push_back({FilterKind::Square, 0.0, "square"});
  bank.push_back({FilterKind::SquareRoot, 0.0, "squareroot"});
  bank.push_back({FilterKind::Logarithm, 0.0, "logarithm"});
  bank.push_back({FilterKind::Exponential, 0.0, "exponential"});
  bank.push_back({FilterKind::Gradient, 0.0, "gradient"});
  bank.push_back({FilterKind::Lbp2D, 0.0, "lbp-2D"});
  return bank;
}

GrayImage apply_filter_raw(const GrayImage& patch, const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterKind::WaveletLL:
      require_min_side(patch, spec.name);
      return haar_subband_image(patch, HaarSubband::LL);
    case FilterKind::WaveletLH:
      require_min_side(patch, spec.name);
      return haar_subband_image(patch, HaarSubband::LH);
    case FilterKind::WaveletHL:
      require_min_side(patch, spec.name);
      return haar_subband_image(patch, HaarSubband::HL);
    case FilterKind::WaveletHH:
      require_min_side(patch, spec.name);
      return haar_subband_image(patch, HaarSubband::HH);
    case FilterKind::LoG: {
      require_min_side(patch, spec.name);
      const double sigma_px = spec.sigma_mm / patch.pixel_pitch_mm();
      const LogKernel1D k = make_log_kernel(sigma_px);
      GrayImage xx = separable_convolve(patch, k.second_deriv, k.gauss);
      GrayImage yy = separable_convolve(patch, k.gauss, k.second_deriv);
      for (std::size_t i = 0; i < xx.size(); ++i) xx[i] += yy[i];
      return xx;
    }
    case FilterKind::Square:
      return pointwise(patch, [](double v) { return v * v; });
    case FilterKind::SquareRoot:
      return pointwise(patch, [](double v) { return std::sqrt(std::max(v, 0.0)); });
    case FilterKind::Logarithm:
      return pointwise(patch, [](double v) { return std::log1p(std::max(v, 0.0)); });
    case FilterKind::Exponential:
      return pointwise(patch, [](double v) { return std::expm1(v); });
    case FilterKind::Gradient:
      return gradient_magnitude(patch);
    case FilterKind::Lbp2D:
      return lbp_riu2(patch);
  }
  fail(ErrorCode::BadConfig, "unknown filter kind");
}

GrayImage rescale_unit_or_zero(const GrayImage& img) {
  const auto [mn_it, mx_it] =
      std::minmax_element(img.values().begin(), img.values().end());
  const double mn = *mn_it, mx = *mx_it;
  GrayImage out = img;
  if (mx == mn) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
    return out;
  }
  const double span = mx - mn;
  for (auto& v : out.values()) v = std::clamp((v - mn) / span, 0.0, 1.0);
  return out;
}

GrayImage apply_filter(const GrayImage& patch, const FilterSpec& spec) {
  return rescale_unit_or_zero(apply_filter_raw(patch, spec));
}

}  // namespace optomx

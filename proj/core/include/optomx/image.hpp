#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/error.hpp"

namespace optomx {

// Default scanner resolution: 42 micrometers per pixel.
inline constexpr double kDefaultPixelPitchMm = 0.042;

// Semantics of the label mask values.
enum Label : std::uint8_t {
  kBackground = 0,
  kNormal = 1,
  kTumor = 2,
  kCalibration = 3,
};

// 2D scalar field with a physical pixel pitch. Row-major, values finite.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double pixel_pitch_mm = kDefaultPixelPitchMm,
            double fill = 0.0)
      : width_(width), height_(height), pitch_(pixel_pitch_mm),
        values_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 1 || height < 1)
      fail(ErrorCode::ShapeMismatch, "GrayImage: width and height must be >= 1");
    if (!(pixel_pitch_mm > 0.0))
      fail(ErrorCode::BadConfig, "GrayImage: pixel pitch must be > 0");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double pixel_pitch_mm() const { return pitch_; }
  double pixel_area_mm2() const { return pitch_ * pitch_; }
  std::size_t size() const { return values_.size(); }

  double& at(int row, int col) { return values_[idx(row, col)]; }
  double at(int row, int col) const { return values_[idx(row, col)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool same_shape(const GrayImage& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  // Copies the size x size square centered at (row, col); the caller must
  // ensure the footprint is in bounds.
  GrayImage crop(int center_row, int center_col, int size) const;

 private:
  std::size_t idx(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  double pitch_ = kDefaultPixelPitchMm;
  std::vector<double> values_;
};

// Fluorescence slice plus its ground-truth label mask and study metadata.
struct LabeledSlice {
  GrayImage image;
  std::vector<std::uint8_t> labels;  // same shape as image, values 0..3
  std::string slice_id;
  std::string patient_id;
  int dose_group = 1;  // 1, 2 or 3

  std::uint8_t label_at(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * image.width() + col];
  }

  // Shape agreement and, for analysis slices, presence of tissue labels.
  void validate(bool require_tissue = true) const;
};

inline int dose_nanomoles(int dose_group) {
  switch (dose_group) {
    case 1: return 30;
    case 2: return 90;
    case 3: return 171;
    default: fail(ErrorCode::BadConfig, "dose_group must be 1, 2 or 3");
  }
}

// Quantized patch: integer levels in [1, Ng].
struct DiscretePatch {
  int width = 0;
  int height = 0;
  int num_levels = 0;  // Ng
  std::vector<int> levels;

  int at(int row, int col) const {
    return levels[static_cast<std::size_t>(row) * width + col];
  }
};

}  // namespace optomx

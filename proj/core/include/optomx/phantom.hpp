#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// Synthetic fluorescence study generator. Each slice carries a calibration
// square, a tissue ellipse of smooth low-variance texture, and tumor blobs
// with short-correlation, high-variance, blotchy texture whose mean clears
// the configured signal-to-background ratio. Dose groups differ only by a
// global brightness multiplier, which standardization must remove.
struct PhantomConfig {
  int patients = 12;          // split evenly over the 3 dose groups
  int slices_per_group = 8;   // total slices = 3 * slices_per_group
  int image_size = 256;       // square canvas, pixels
  std::array<double, 3> dose_multipliers = {1.0, 2.5, 4.0};
  double target_sbr = 10.0;   // tumor mean / background mean, before noise
  double background_mean = 0.05;
  double calibration_value = 1.0;
  // Normal-tissue mean as a fraction of the tumor mean; raising it pushes
  // the two intensity histograms together so thresholding cannot be
  // perfect while texture still separates the classes.
  double intensity_overlap = 0.55;
  double normal_amplitude = 0.06;  // relative texture SD, normal tissue
  double normal_corr_px = 16.0;    // Gaussian correlation length
  double tumor_amplitude = 0.30;
  double tumor_corr_px = 2.0;
  int blotch_count = 12;           // multiplicative patches per tumor blob
  double blotch_amplitude = 0.5;
  double noise_sd = 0.01;          // additive, scaled with the dose multiplier
  double pixel_pitch_mm = kDefaultPixelPitchMm;
  std::uint64_t seed = 1234;

  void validate() const;
};

// All slices of a study, deterministic per seed (slice order and content),
// independent of thread count.
std::vector<LabeledSlice> generate_study(const PhantomConfig& cfg,
                                         int threads = 1);

// Writes <dir>/<slice_id>.pgm (16-bit, one shared scale across the study),
// <dir>/<slice_id>_mask.pgm and <dir>/manifest.csv; returns the manifest
// path.
std::string write_study(const std::string& dir,
                        const std::vector<LabeledSlice>& slices);

}  // namespace optomx

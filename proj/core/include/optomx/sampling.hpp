#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// A labeled square sub-image. Patches are labeled by their center pixel's
// ROI; the footprint may spill into neighboring tissue but never outside
// the image bounds.
struct PatchSample {
  GrayImage pixels;
  int center_row = 0;
  int center_col = 0;
  double size_mm = 0.0;
  int size_px = 0;  // odd
  int label = 0;    // 0 = normal, 1 = tumor
  std::string slice_id;
};

// Center coordinates only (used when the pixel data is cropped later, e.g.
// once per scale around a shared center list).
struct PatchCenter {
  int row = 0;
  int col = 0;
  int label = 0;  // 0 = normal, 1 = tumor
};

struct StudyPartition {
  std::vector<std::string> train_slices;
  std::vector<std::string> test_slices;
};

// Physical size to an odd pixel count: round(size_mm / pitch), then the
// nearest odd integer with ties resolved upward.
int patch_side_px(double size_mm, double pitch_mm);

// Flat indices of pixels that carry `tissue_label` and whose centered
// size_px x size_px window lies fully inside the image.
std::vector<std::size_t> eligible_centers(const LabeledSlice& slice,
                                          std::uint8_t tissue_label,
                                          int size_px);

// Draws `count` centers uniformly from the eligible set: without
// replacement while the set is large enough, with replacement otherwise.
// Seeded per slice (seed xor hash(slice_id)) so per-slice work reproduces
// under any execution order. Throws EmptyRoi when no center is eligible.
std::vector<PatchSample> sample_patches(const LabeledSlice& slice,
                                        std::uint8_t tissue_label,
                                        double size_mm, int count,
                                        std::uint64_t seed);

// Per-slice budget split between the two tissue classes in proportion to
// their eligible-center counts (each non-empty class gets at least one).
// Eligibility uses `eligibility_size_px`, normally the largest patch side
// so one center list serves every scale.
std::vector<PatchCenter> sample_slice_centers(const LabeledSlice& slice,
                                              int eligibility_size_px,
                                              int budget, std::uint64_t seed);

// Slice-level split: within each dose group, round(fraction * n) slices go
// to training, the rest to test. Throws GroupTooSmall when a dose group
// has fewer than 2 slices.
StudyPartition partition_slices(const std::vector<LabeledSlice>& slices,
                                double fraction, std::uint64_t seed);

}  // namespace optomx

#include "optomx/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "optomx/rng.hpp"

namespace optomx {

int patch_side_px(double size_mm, double pitch_mm) {
  if (!(size_mm > 0.0) || !(pitch_mm > 0.0))
    fail(ErrorCode::BadConfig, "patch_side_px: sizes must be positive");
  long side = std::lround(size_mm / pitch_mm);
  if (side < 1) side = 1;
  if (side % 2 == 0) ++side;  // nearest odd, tie upward
  return static_cast<int>(side);
}

std::vector<std::size_t> eligible_centers(const LabeledSlice& slice,
                                          std::uint8_t tissue_label,
                                          int size_px) {
  const int half = size_px / 2;
  const int w = slice.image.width(), h = slice.image.height();
  std::vector<std::size_t> out;
  for (int r = half; r < h - half; ++r)
    for (int c = half; c < w - half; ++c)
      if (slice.label_at(r, c) == tissue_label)
        out.push_back(static_cast<std::size_t>(r) * w + c);
  return out;
}

namespace {

// `count` draws from [0, n): a partial Fisher-Yates prefix while n >= count,
// independent uniform draws otherwise.
std::vector<std::size_t> draw_indices(std::size_t n, int count, Rng& rng) {
  std::vector<std::size_t> picks;
  picks.reserve(static_cast<std::size_t>(count));
  if (n >= static_cast<std::size_t>(count)) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < count; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) + rng.below(n - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      picks.push_back(pool[static_cast<std::size_t>(i)]);
    }
  } else {
    for (int i = 0; i < count; ++i) picks.push_back(rng.below(n));
  }
  return picks;
}

}  // namespace

std::vector<PatchSample> sample_patches(const LabeledSlice& slice,
                                        std::uint8_t tissue_label,
                                        double size_mm, int count,
                                        std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::BadConfig, "sample_patches: count must be >= 1");
  const int side = patch_side_px(size_mm, slice.image.pixel_pitch_mm());
  const auto eligible = eligible_centers(slice, tissue_label, side);
  if (eligible.empty())
    fail(ErrorCode::EmptyRoi, "sample_patches: no eligible center for label " +
                                  std::to_string(tissue_label) + " in slice " +
                                  slice.slice_id);
  Rng rng = Rng(seed).stream(slice.slice_id)
                .stream(static_cast<std::uint64_t>(tissue_label));
  const auto picks = draw_indices(eligible.size(), count, rng);
  std::vector<PatchSample> out;
  out.reserve(picks.size());
  for (std::size_t pick : picks) {
    const std::size_t flat = eligible[pick];
    PatchSample p;
    p.center_row = static_cast<int>(flat / slice.image.width());
    p.center_col = static_cast<int>(flat % slice.image.width());
    p.pixels = slice.image.crop(p.center_row, p.center_col, side);
    p.size_mm = size_mm;
    p.size_px = side;
    p.label = tissue_label == kTumor ? 1 : 0;
    p.slice_id = slice.slice_id;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PatchCenter> sample_slice_centers(const LabeledSlice& slice,
                                              int eligibility_size_px,
                                              int budget, std::uint64_t seed) {
  if (budget < 2)
    fail(ErrorCode::BadConfig, "sample_slice_centers: budget must be >= 2");
  const auto normal = eligible_centers(slice, kNormal, eligibility_size_px);
  const auto tumor = eligible_centers(slice, kTumor, eligibility_size_px);
  if (normal.empty() && tumor.empty())
    fail(ErrorCode::EmptyRoi,
         "sample_slice_centers: no eligible tissue center in slice " +
             slice.slice_id);

  // Budget split proportional to eligible area; non-empty classes keep at
  // least one patch each.
  const double total = static_cast<double>(normal.size() + tumor.size());
  int n_tumor = static_cast<int>(
      std::lround(budget * static_cast<double>(tumor.size()) / total));
  if (!tumor.empty() && n_tumor == 0) n_tumor = 1;
  if (!normal.empty() && n_tumor == budget) n_tumor = budget - 1;
  if (tumor.empty()) n_tumor = 0;
  const int n_normal = budget - n_tumor;

  std::vector<PatchCenter> out;
  out.reserve(static_cast<std::size_t>(budget));
  const int w = slice.image.width();
  auto emit = [&](const std::vector<std::size_t>& pool, int count, int label,
                  std::uint64_t stream_tag) {
    if (count == 0) return;
    Rng rng = Rng(seed).stream(slice.slice_id).stream(stream_tag);
    for (std::size_t pick : draw_indices(pool.size(), count, rng)) {
      const std::size_t flat = pool[pick];
      out.push_back({static_cast<int>(flat / w), static_cast<int>(flat % w),
                     label});
    }
  };
  emit(normal, n_normal, 0, kNormal);
  emit(tumor, n_tumor, 1, kTumor);
  return out;
}

StudyPartition partition_slices(const std::vector<LabeledSlice>& slices,
                                double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    fail(ErrorCode::BadConfig, "partition_slices: fraction must be in (0,1)");
  std::map<int, std::vector<std::string>> groups;
  for (const auto& s : slices) groups[s.dose_group].push_back(s.slice_id);

  StudyPartition part;
  for (auto& [group, ids] : groups) {
    if (ids.size() < 2)
      fail(ErrorCode::GroupTooSmall,
           "partition_slices: dose group " + std::to_string(group) +
               " has fewer than 2 slices");
    std::sort(ids.begin(), ids.end());
    Rng rng = Rng(seed).stream("partition-group")
                  .stream(static_cast<std::uint64_t>(group));
    rng.shuffle(ids);
    const auto n_train = static_cast<std::size_t>(
        std::lround(fraction * static_cast<double>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i)
      (i < n_train ? part.train_slices : part.test_slices).push_back(ids[i]);
  }
  std::sort(part.train_slices.begin(), part.train_slices.end());
  std::sort(part.test_slices.begin(), part.test_slices.end());
  return part;
}

}  // namespace optomx

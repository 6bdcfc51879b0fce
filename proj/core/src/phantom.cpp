#include "optomx/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "optomx/error.hpp"
#include "optomx/imageio.hpp"
#include "optomx/parallel.hpp"
#include "optomx/rng.hpp"

namespace optomx {
namespace {

// Zero-mean, unit-variance Gaussian random field: white noise smoothed by
// a separable Gaussian of the requested correlation length, then rescaled
// by its empirical moments.
std::vector<double> random_field(Rng& rng, int size, double corr_px) {
  const std::size_t n = static_cast<std::size_t>(size) * size;
  std::vector<double> field(n);
  for (auto& v : field) v = rng.normal();

  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * corr_px)));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (corr_px * corr_px));
    ksum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= ksum;

  const auto mirror = [size](int i) {
    while (i < 0 || i >= size) {
      if (i < 0) i = -i - 1;
      if (i >= size) i = 2 * size - 1 - i;
    }
    return i;
  };

  std::vector<double> tmp(n);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * field[static_cast<std::size_t>(r) * size + mirror(c + i)];
      tmp[static_cast<std::size_t>(r) * size + c] = acc;
    }
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * tmp[static_cast<std::size_t>(mirror(r + i)) * size + c];
      field[static_cast<std::size_t>(r) * size + c] = acc;
    }

  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : field) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (sd > 0.0)
    for (auto& v : field) v = (v - mean) / sd;
  return field;
}

struct Ellipse {
  double cy, cx, ry, rx;
  bool contains(int r, int c) const {
    const double dy = (r - cy) / ry, dx = (c - cx) / rx;
    return dy * dy + dx * dx <= 1.0;
  }
};

LabeledSlice make_slice(const PhantomConfig& cfg, const std::string& slice_id,
                        const std::string& patient_id, int dose_group,
                        std::uint64_t slice_seed) {
  Rng rng = Rng(cfg.seed).stream("phantom").stream(slice_seed);
  const int size = cfg.image_size;
  const double mult = cfg.dose_multipliers[dose_group - 1];
  // 15% headroom over the target ratio so texture modulation cannot pull
  // the realized tumor mean below it.
  const double tumor_mean = 1.15 * cfg.target_sbr * cfg.background_mean;
  const double normal_mean = cfg.intensity_overlap * tumor_mean;

  LabeledSlice slice;
  slice.slice_id = slice_id;
  slice.patient_id = patient_id;
  slice.dose_group = dose_group;
  slice.image = GrayImage(size, size, cfg.pixel_pitch_mm);
  slice.labels.assign(static_cast<std::size_t>(size) * size, kBackground);

  const auto jitter = [&rng](double span) {
    return (rng.unit() * 2.0 - 1.0) * span;
  };

  // Geometry: calibration square top-left, tissue ellipse below it.
  const int calib0 = size / 32 + 4;
  const int calib_side = std::max(8, size / 10);
  Ellipse tissue{size * 0.58 + jitter(size * 0.02),
                 size * 0.50 + jitter(size * 0.02), size * 0.30 + jitter(size * 0.02),
                 size * 0.36 + jitter(size * 0.02)};

  const int n_tumors = 2 + static_cast<int>(rng.below(2));
  std::vector<Ellipse> tumors;
  for (int t = 0; t < n_tumors; ++t) {
    const double ang = rng.unit() * 6.283185307179586;
    const double rad = 0.15 + 0.45 * rng.unit();
    tumors.push_back({tissue.cy + rad * tissue.ry * std::sin(ang),
                      tissue.cx + rad * tissue.rx * std::cos(ang),
                      size * (0.045 + 0.04 * rng.unit()),
                      size * (0.045 + 0.04 * rng.unit())});
  }

  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      std::uint8_t& lab = slice.labels[static_cast<std::size_t>(r) * size + c];
      if (r >= calib0 && r < calib0 + calib_side && c >= calib0 &&
          c < calib0 + calib_side) {
        lab = kCalibration;
        continue;
      }
      if (!tissue.contains(r, c)) continue;
      lab = kNormal;
      for (const auto& e : tumors)
        if (e.contains(r, c)) {
          lab = kTumor;
          break;
        }
    }

  const std::vector<double> normal_field = random_field(rng, size, cfg.normal_corr_px);
  const std::vector<double> tumor_field = random_field(rng, size, cfg.tumor_corr_px);

  // Multiplicative blotches centered inside the tumor blobs.
  std::vector<double> blotch(static_cast<std::size_t>(size) * size, 1.0);
  for (const auto& e : tumors)
    for (int b = 0; b < cfg.blotch_count; ++b) {
      const double ang = rng.unit() * 6.283185307179586;
      const double rad = std::sqrt(rng.unit());
      const double by = e.cy + rad * e.ry * std::sin(ang);
      const double bx = e.cx + rad * e.rx * std::cos(ang);
      const double br = 0.35 * (0.5 + rng.unit()) * std::min(e.ry, e.rx);
      const double amp =
          cfg.blotch_amplitude * (b % 2 == 0 ? 1.0 : -1.0) * (0.6 + 0.4 * rng.unit());
      const int r0 = std::max(0, static_cast<int>(by - 3 * br));
      const int r1 = std::min(size - 1, static_cast<int>(by + 3 * br));
      const int c0 = std::max(0, static_cast<int>(bx - 3 * br));
      const int c1 = std::min(size - 1, static_cast<int>(bx + 3 * br));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
          const double d2 = (r - by) * (r - by) + (c - bx) * (c - bx);
          blotch[static_cast<std::size_t>(r) * size + c] +=
              amp * std::exp(-0.5 * d2 / (br * br));
        }
    }

  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * size + c;
      double v = cfg.background_mean;
      switch (slice.labels[i]) {
        case kCalibration:
          v = cfg.calibration_value;
          break;
        case kNormal:
          v = normal_mean * (1.0 + cfg.normal_amplitude * normal_field[i]);
          break;
        case kTumor:
          v = tumor_mean * (1.0 + cfg.tumor_amplitude * tumor_field[i]) *
              std::clamp(blotch[i], 0.2, 3.0);
          break;
        default:
          break;
      }
      v = std::max(v, 0.0) * mult;
      v += cfg.noise_sd * mult * rng.normal();
      slice.image[i] = std::max(v, 0.0);
    }

  slice.validate();
  return slice;
}

}  // namespace

void PhantomConfig::validate() const {
  if (patients < 3 || patients % 3 != 0)
    fail(ErrorCode::BadConfig, "phantom: patients must be a positive multiple of 3");
  const int per_group = patients / 3;
  if (slices_per_group < 1 || slices_per_group % per_group != 0)
    fail(ErrorCode::BadConfig,
         "phantom: slices_per_group must be a multiple of patients/3");
  if (image_size < 96)
    fail(ErrorCode::BadConfig, "phantom: image_size must be >= 96");
  if (!(target_sbr >= 1.0))
    fail(ErrorCode::BadConfig, "phantom: target_sbr must be >= 1");
  if (!(noise_sd >= 0.0))
    fail(ErrorCode::BadConfig, "phantom: noise_sd must be >= 0");
  if (!(background_mean > 0.0) || !(calibration_value > 0.0))
    fail(ErrorCode::BadConfig, "phantom: intensities must be positive");
  if (!(intensity_overlap > 0.0) || !(intensity_overlap < 1.0))
    fail(ErrorCode::BadConfig, "phantom: intensity_overlap must be in (0, 1)");
  if (!(normal_corr_px > 0.0) || !(tumor_corr_px > 0.0))
    fail(ErrorCode::BadConfig, "phantom: correlation lengths must be > 0");
  if (normal_amplitude < 0.0 || tumor_amplitude < 0.0 || blotch_amplitude < 0.0 ||
      blotch_count < 0)
    fail(ErrorCode::BadConfig, "phantom: texture amplitudes must be >= 0");
  for (double m : dose_multipliers)
    if (!(m > 0.0))
      fail(ErrorCode::BadConfig, "phantom: dose multipliers must be > 0");
}

std::vector<LabeledSlice> generate_study(const PhantomConfig& cfg, int threads) {
  cfg.validate();
  const int patients_per_group = cfg.patients / 3;
  const int slices_per_patient = cfg.slices_per_group / patients_per_group;

  struct Plan {
    std::string slice_id, patient_id;
    int dose_group;
  };
  std::vector<Plan> plans;
  for (int p = 0; p < cfg.patients; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%02d", p + 1);
    const int group = p / patients_per_group + 1;
    for (int s = 0; s < slices_per_patient; ++s) {
      char sid[32];
      std::snprintf(sid, sizeof(sid), "%sS%d", pid, s + 1);
      plans.push_back({sid, pid, group});
    }
  }

  std::vector<LabeledSlice> slices(plans.size());
  parallel_for(plans.size(), threads, [&](std::size_t i) {
    slices[i] = make_slice(cfg, plans[i].slice_id, plans[i].patient_id,
                           plans[i].dose_group, fnv1a64(plans[i].slice_id));
  });
  return slices;
}

std::string write_study(const std::string& dir,
                        const std::vector<LabeledSlice>& slices) {
  double peak = 0.0;
  for (const auto& s : slices)
    for (double v : s.image.values()) peak = std::max(peak, v);
  if (!(peak > 0.0)) peak = 1.0;

  std::vector<ManifestEntry> entries;
  for (const auto& s : slices) {
    write_pgm16(dir + "/" + s.slice_id + ".pgm", s.image, peak);
    write_pgm8(dir + "/" + s.slice_id + "_mask.pgm", s.labels, s.image.width(),
               s.image.height());
    entries.push_back({s.slice_id, s.patient_id, s.dose_group,
                       dir + "/" + s.slice_id + ".pgm",
                       dir + "/" + s.slice_id + "_mask.pgm"});
  }
  const std::string manifest = dir + "/manifest.csv";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace optomx

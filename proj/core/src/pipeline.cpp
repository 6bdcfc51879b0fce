#include "optomx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "optomx/csv.hpp"
#include "optomx/error.hpp"
#include "optomx/features.hpp"
#include "optomx/imageio.hpp"
#include "optomx/imaging.hpp"
#include "optomx/model_io.hpp"
#include "optomx/model_selection.hpp"
#include "optomx/parallel.hpp"
#include "optomx/phantom.hpp"
#include "optomx/probmap.hpp"
#include "optomx/rng.hpp"
#include "optomx/sampling.hpp"
#include "optomx/stats.hpp"
#include "optomx/thresholding.hpp"

namespace optomx {
namespace {

namespace fs = std::filesystem;

std::string scale_tag(double scale_mm) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", scale_mm);
  return buf;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create directory " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path);
}

std::string hash_line(std::uint32_t h) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "# config_hash=%08x\n", h);
  return buf;
}

// Reads the "# config_hash=" comment and verifies it against the active
// configuration, so artifacts from different configs cannot be mixed.
std::ifstream open_checked(const std::string& path, std::uint32_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::uint32_t h = 0;
  if (std::sscanf(line.c_str(), "# config_hash=%x", &h) != 1)
    fail(ErrorCode::BadFormat, path + ": missing config_hash line");
  if (h != expected)
    fail(ErrorCode::ConfigHashMismatch,
         path + ": artifact was produced by a different configuration");
  return in;
}

double to_double(const std::string& s, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    fail(ErrorCode::BadFormat, context + ": bad number '" + s + "'");
  return v;
}

template <typename Fn>
void with_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[stage ") + name + "] " + e.what());
  }
}

std::vector<LabeledSlice> load_study_for(const RunConfig& cfg) {
  return load_study(manifest_path(cfg), cfg.pixel_pitch_mm);
}

StudyPartition read_partition(const ArtifactPaths& paths, std::uint32_t hash) {
  std::ifstream in = open_checked(paths.partition_csv, hash);
  std::string line;
  std::getline(in, line);  // header
  StudyPartition part;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2)
      fail(ErrorCode::BadFormat, paths.partition_csv + ": bad row");
    if (cells[1] == "train")
      part.train_slices.push_back(cells[0]);
    else if (cells[1] == "test")
      part.test_slices.push_back(cells[0]);
    else
      fail(ErrorCode::BadFormat,
           paths.partition_csv + ": role must be train or test");
  }
  return part;
}

std::map<std::string, std::vector<PatchCenter>> read_centers(
    const ArtifactPaths& paths, std::uint32_t hash) {
  std::ifstream in = open_checked(paths.centers_csv, hash);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::vector<PatchCenter>> centers;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4)
      fail(ErrorCode::BadFormat, paths.centers_csv + ": bad row");
    centers[cells[0]].push_back(
        {static_cast<int>(to_double(cells[1], "centers")),
         static_cast<int>(to_double(cells[2], "centers")),
         static_cast<int>(to_double(cells[3], "centers"))});
  }
  return centers;
}

GrayImage read_standardized(const ArtifactPaths& paths,
                            const std::string& slice_id, std::uint32_t hash,
                            double pitch) {
  std::uint32_t stored = 0;
  GrayImage img =
      read_float_grid(paths.standardized_grid(slice_id), stored, pitch);
  if (stored != hash)
    fail(ErrorCode::ConfigHashMismatch,
         paths.standardized_grid(slice_id) +
             ": artifact was produced by a different configuration");
  return img;
}

FeatureTable read_features_checked(const std::string& path,
                                   std::uint32_t hash) {
  std::uint32_t stored = 0;
  FeatureTable t = read_feature_csv(path, stored);
  if (stored != hash)
    fail(ErrorCode::ConfigHashMismatch,
         path + ": artifact was produced by a different configuration");
  return t;
}

GridChoice read_choice(const ArtifactPaths& paths, std::uint32_t hash) {
  std::ifstream in = open_checked(paths.cv_choice_csv, hash);
  std::string line;
  std::getline(in, line);  // header
  if (!std::getline(in, line))
    fail(ErrorCode::BadFormat, paths.cv_choice_csv + ": missing choice row");
  const auto cells = split_csv_line(line);
  if (cells.size() != 5)
    fail(ErrorCode::BadFormat, paths.cv_choice_csv + ": bad choice row");
  GridChoice choice;
  choice.classifier = classifier_from_name(cells[0]);
  choice.selector = selector_from_name(cells[1]);
  choice.k = static_cast<int>(to_double(cells[2], "choice"));
  choice.best_mean_accuracy = to_double(cells[3], "choice");
  choice.k_mean_accuracy = to_double(cells[4], "choice");
  return choice;
}

int max_patch_side_px(const RunConfig& cfg) {
  int side = 1;
  for (double s : cfg.patch_sizes_mm)
    side = std::max(side, patch_side_px(s, cfg.pixel_pitch_mm));
  return side;
}

std::uint64_t final_seed(const RunConfig& cfg, const std::string& tag) {
  return Rng(cfg.seed).stream("final").stream(tag).next_u64();
}

// Per-slice fused tumor probabilities at the shared patch centers,
// averaging the per-scale pipeline outputs. Returns, per requested slice,
// aligned vectors of center coordinates, labels and fused probabilities.
struct SlicePredictions {
  std::string slice_id;
  std::vector<int> rows, cols, labels;
  std::vector<std::vector<double>> per_scale;  // [scale][patch]
  std::vector<double> fused;
};

std::vector<SlicePredictions> fused_predictions(
    const RunConfig& cfg, const ArtifactPaths& paths, std::uint32_t hash,
    const std::vector<std::string>& slice_ids) {
  const std::size_t n_scales = cfg.patch_sizes_mm.size();
  std::vector<FeatureTable> tables;
  std::vector<TrainedPipeline> models;
  for (double s : cfg.patch_sizes_mm) {
    tables.push_back(read_features_checked(paths.features_csv(s), hash));
    TrainedPipeline p = load_pipeline(paths.model_path(s));
    if (p.config_hash != hash)
      fail(ErrorCode::ConfigHashMismatch,
           paths.model_path(s) +
               ": artifact was produced by a different configuration");
    models.push_back(std::move(p));
  }

  // (slice, patch) -> row per scale; scales share one center list so the
  // keys agree by construction.
  std::vector<std::map<std::pair<std::string, int>, std::size_t>> row_of(
      n_scales);
  for (std::size_t t = 0; t < n_scales; ++t)
    for (std::size_t r = 0; r < tables[t].rows(); ++r)
      row_of[t][{tables[t].meta[r].slice_id, tables[t].meta[r].patch_id}] = r;

  std::vector<SlicePredictions> out;
  for (const auto& sid : slice_ids) {
    SlicePredictions sp;
    sp.slice_id = sid;
    sp.per_scale.resize(n_scales);
    for (std::size_t r = 0; r < tables[0].rows(); ++r) {
      const PatchMeta& m = tables[0].meta[r];
      if (m.slice_id != sid) continue;
      sp.rows.push_back(m.center_row_px);
      sp.cols.push_back(m.center_col_px);
      sp.labels.push_back(m.label);
      std::vector<double> probs;
      for (std::size_t t = 0; t < n_scales; ++t) {
        const auto it = row_of[t].find({sid, m.patch_id});
        if (it == row_of[t].end())
          fail(ErrorCode::CenterMismatch,
               "feature tables disagree on patch centers for slice " + sid);
        const double p = predict_pipeline(models[t], tables[t].row(it->second),
                                          tables[t].cols());
        probs.push_back(p);
        sp.per_scale[t].push_back(p);
      }
      sp.fused.push_back(pairwise_mean(probs));
    }
    if (sp.fused.empty())
      fail(ErrorCode::MissingMetrics, "no extracted patches for slice " + sid);
    out.push_back(std::move(sp));
  }
  return out;
}

void stage_phantom(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  PhantomConfig pc = cfg.phantom;
  pc.seed = cfg.seed;
  pc.pixel_pitch_mm = cfg.pixel_pitch_mm;
  ensure_dir(paths.study_dir);
  write_study(paths.study_dir, generate_study(pc, resolve_threads(cfg.threads)));
}

void stage_preprocess(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const auto slices = load_study_for(cfg);
  ensure_dir(paths.standardized_dir);
  std::vector<GrayImage> grids(slices.size());
  parallel_for(slices.size(), resolve_threads(cfg.threads),
               [&](std::size_t i) { grids[i] = standardize(slices[i]); });
  for (std::size_t i = 0; i < slices.size(); ++i)
    write_float_grid(paths.standardized_grid(slices[i].slice_id), grids[i],
                     hash);
}

void stage_partition(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const auto slices = load_study_for(cfg);
  const StudyPartition part =
      partition_slices(slices, cfg.train_fraction, cfg.seed);
  std::string out = hash_line(config_hash(cfg));
  out += "slice_id,role\n";
  for (const auto& id : part.train_slices) out += id + ",train\n";
  for (const auto& id : part.test_slices) out += id + ",test\n";
  write_text_file(paths.partition_csv, out);
}

void stage_sample(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const auto slices = load_study_for(cfg);
  const int elig = max_patch_side_px(cfg);
  std::string out = hash_line(config_hash(cfg));
  out += "slice_id,center_row_px,center_col_px,label\n";
  for (const auto& slice : slices) {
    const auto centers =
        sample_slice_centers(slice, elig, cfg.patches_per_slice, cfg.seed);
    for (const auto& c : centers)
      out += slice.slice_id + "," + std::to_string(c.row) + "," +
             std::to_string(c.col) + "," + std::to_string(c.label) + "\n";
  }
  write_text_file(paths.centers_csv, out);
}

void stage_extract(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const auto slices = load_study_for(cfg);
  const auto centers = read_centers(paths, hash);
  const auto bank = default_bank();
  const int threads = resolve_threads(cfg.threads);

  std::vector<GrayImage> grids(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i)
    grids[i] = read_standardized(paths, slices[i].slice_id, hash,
                                 cfg.pixel_pitch_mm);

  for (double scale : cfg.patch_sizes_mm) {
    const int side = patch_side_px(scale, cfg.pixel_pitch_mm);
    FeatureTable table;
    table.names = feature_names(bank);

    struct Job {
      std::size_t slice_idx;
      int patch_id;
      PatchCenter center;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < slices.size(); ++i) {
      const auto it = centers.find(slices[i].slice_id);
      if (it == centers.end())
        fail(ErrorCode::MissingMetrics,
             "no sampled centers for slice " + slices[i].slice_id);
      for (std::size_t c = 0; c < it->second.size(); ++c)
        jobs.push_back({i, static_cast<int>(c), it->second[c]});
    }

    table.meta.resize(jobs.size());
    table.values.assign(jobs.size() * table.names.size(), 0.0);
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
      const Job& job = jobs[j];
      const LabeledSlice& slice = slices[job.slice_idx];
      const GrayImage patch =
          grids[job.slice_idx].crop(job.center.row, job.center.col, side);
      const std::vector<double> v = optomic_vector(patch, bank, cfg.ng);
      std::copy(v.begin(), v.end(), table.values.begin() + j * v.size());
      table.meta[j] = {slice.slice_id,  slice.patient_id, slice.dose_group,
                       job.patch_id,    job.center.row,   job.center.col,
                       scale,           job.center.label};
    });
    write_feature_csv(paths.features_csv(scale), table, hash);
  }
}

void stage_cv(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const StudyPartition part = read_partition(paths, hash);
  FeatureTable all =
      read_features_checked(paths.features_csv(cfg.cv_scale_mm), hash);
  const FeatureTable train = all.subset(all.rows_of_slices(part.train_slices));

  GridSpec grid;
  grid.classifiers = cfg.classifier_kinds();
  grid.selectors = cfg.selector_methods();
  for (int k = cfg.k_min; k <= cfg.k_max; k += cfg.k_step) grid.ks.push_back(k);

  const AccuracyCube cube = loocv_grid(train, grid, cfg.clf, 8, cfg.seed,
                                       resolve_threads(cfg.threads));
  write_cube_csv(paths.cv_cube_csv, cube, hash);
  write_cube_summary_csv(paths.cv_summary_csv, cube, hash);

  const GridChoice choice = choose_hyperparameters(cube, cfg.plateau_c);
  std::string out = hash_line(hash);
  out += "classifier,selector,k,best_mean_accuracy,k_mean_accuracy\n";
  out += classifier_name(choice.classifier) + "," +
         selector_name(choice.selector) + "," + std::to_string(choice.k) +
         "," + format_real(choice.best_mean_accuracy) + "," +
         format_real(choice.k_mean_accuracy) + "\n";
  write_text_file(paths.cv_choice_csv, out);
}

void stage_train(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const StudyPartition part = read_partition(paths, hash);
  const GridChoice choice = read_choice(paths, hash);
  for (double scale : cfg.patch_sizes_mm) {
    FeatureTable all = read_features_checked(paths.features_csv(scale), hash);
    const FeatureTable train =
        all.subset(all.rows_of_slices(part.train_slices));
    const TrainedPipeline p =
        fit_final(train, choice.classifier, choice.selector, choice.k,
                  cfg.clf, 8, final_seed(cfg, scale_tag(scale)), hash);
    save_pipeline(paths.model_path(scale), p);
  }
}

void stage_eval_threshold(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const auto slices = load_study_for(cfg);
  const StudyPartition part = read_partition(paths, hash);
  const std::set<std::string> train_ids(part.train_slices.begin(),
                                        part.train_slices.end());

  std::vector<double> values;
  std::vector<int> labels;
  std::map<std::string, const LabeledSlice*> by_id;
  for (const auto& slice : slices) by_id[slice.slice_id] = &slice;

  for (const auto& slice : slices) {
    if (!train_ids.count(slice.slice_id)) continue;
    const GrayImage g =
        read_standardized(paths, slice.slice_id, hash, cfg.pixel_pitch_mm);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::uint8_t lab = slice.labels[i];
      if (lab != kNormal && lab != kTumor) continue;
      values.push_back(g[i]);
      labels.push_back(lab == kTumor ? 1 : 0);
    }
  }
  const RocCurve roc = roc_curve(values, labels);
  const double ocp = optimal_cutoff(roc);
  double train_acc = 0.0;
  for (std::size_t i = 0; i < roc.thresholds.size(); ++i)
    if (roc.thresholds[i] == ocp) train_acc = roc.accuracy[i];

  std::string model = hash_line(hash);
  model += "optimal_cutoff,train_accuracy,train_pixels\n";
  model += format_real(ocp) + "," + format_real(train_acc) + "," +
           std::to_string(values.size()) + "\n";
  write_text_file(paths.threshold_model_csv, model);

  ensure_dir(fs::path(paths.threshold_mask_png("x")).parent_path().string());
  std::string metrics = hash_line(hash);
  metrics += "slice_id,accuracy,sensitivity,specificity,fnr,fpr\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_real(*v) : std::string();
  };
  for (const auto& id : part.test_slices) {
    const LabeledSlice& slice = *by_id.at(id);
    const GrayImage g =
        read_standardized(paths, id, hash, cfg.pixel_pitch_mm);
    const PixelClassification pc = classify_pixels(slice, g, ocp);
    const ConfusionMetrics m = confusion_metrics(pc.confusion);
    metrics += id + "," + format_real(m.accuracy) + "," + cell(m.sensitivity) +
               "," + cell(m.specificity) + "," + cell(m.fnr) + "," +
               cell(m.fpr) + "\n";
    std::vector<std::uint8_t> png(pc.mask.size(), 0);
    for (std::size_t i = 0; i < pc.mask.size(); ++i) {
      const std::uint8_t lab = slice.labels[i];
      if (lab == kNormal || lab == kTumor) png[i] = pc.mask[i] ? 255 : 64;
    }
    write_png8_gray(paths.threshold_mask_png(id), png, g.width(), g.height());
  }
  write_text_file(paths.threshold_metrics_csv, metrics);
}

void stage_eval_optomics(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const StudyPartition part = read_partition(paths, hash);
  const auto preds = fused_predictions(cfg, paths, hash, part.test_slices);

  std::string rows = hash_line(hash);
  rows += "slice_id,patch_id,center_row_px,center_col_px,label";
  for (double s : cfg.patch_sizes_mm) rows += ",p_" + scale_tag(s) + "mm";
  rows += ",fused,predicted\n";

  std::string metrics = hash_line(hash);
  metrics += "slice_id,n_patches,accuracy\n";
  for (const auto& sp : preds) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < sp.fused.size(); ++i) {
      const int predicted = sp.fused[i] >= 0.5 ? 1 : 0;
      if (predicted == sp.labels[i]) ++correct;
      rows += sp.slice_id + "," + std::to_string(i) + "," +
              std::to_string(sp.rows[i]) + "," + std::to_string(sp.cols[i]) +
              "," + std::to_string(sp.labels[i]);
      for (std::size_t t = 0; t < sp.per_scale.size(); ++t)
        rows += "," + format_real(sp.per_scale[t][i]);
      rows += "," + format_real(sp.fused[i]) + "," + std::to_string(predicted) +
              "\n";
    }
    metrics += sp.slice_id + "," + std::to_string(sp.fused.size()) + "," +
               format_real(static_cast<double>(correct) /
                           static_cast<double>(sp.fused.size())) +
               "\n";
  }
  write_text_file(paths.patch_predictions_csv, rows);
  write_text_file(paths.optomics_metrics_csv, metrics);
}

void stage_probmap(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);
  const auto slices = load_study_for(cfg);
  const StudyPartition part = read_partition(paths, hash);
  const auto preds = fused_predictions(cfg, paths, hash, part.test_slices);
  ensure_dir(paths.probmap_dir);

  std::map<std::string, const LabeledSlice*> by_id;
  for (const auto& slice : slices) by_id[slice.slice_id] = &slice;

  for (const auto& sp : preds) {
    const LabeledSlice& slice = *by_id.at(sp.slice_id);
    std::vector<double> rows(sp.rows.begin(), sp.rows.end());
    std::vector<double> cols(sp.cols.begin(), sp.cols.end());
    const SplineModel spline = biharmonic_fit(rows, cols, sp.fused);

    std::vector<std::uint8_t> tissue(slice.labels.size(), 0);
    for (std::size_t i = 0; i < slice.labels.size(); ++i)
      tissue[i] = (slice.labels[i] == kNormal || slice.labels[i] == kTumor)
                      ? 1
                      : 0;
    const ProbabilityMap map =
        biharmonic_eval(spline, slice.image.width(), slice.image.height(),
                        tissue, resolve_threads(cfg.threads));
    write_float_grid(paths.probmap_grid(sp.slice_id), map.grid, hash);
    const GrayImage base =
        read_standardized(paths, sp.slice_id, hash, cfg.pixel_pitch_mm);
    render_heatmap(paths.probmap_png(sp.slice_id), map, base);
  }
}

void stage_report(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  ensure_dir(cfg.out_dir);
  const std::uint32_t hash = config_hash(cfg);

  MethodComparison cmp;
  {
    std::ifstream in = open_checked(paths.threshold_metrics_csv, hash);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() < 2)
        fail(ErrorCode::BadFormat, paths.threshold_metrics_csv + ": bad row");
      cmp.slice_ids.push_back(cells[0]);
      cmp.threshold_accuracy.push_back(to_double(cells[1], "threshold metrics"));
    }
  }
  {
    std::ifstream in = open_checked(paths.optomics_metrics_csv, hash);
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, double> acc;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != 3)
        fail(ErrorCode::BadFormat, paths.optomics_metrics_csv + ": bad row");
      acc[cells[0]] = to_double(cells[2], "optomics metrics");
    }
    for (const auto& id : cmp.slice_ids) {
      const auto it = acc.find(id);
      if (it == acc.end())
        fail(ErrorCode::MissingMetrics,
             "optomics metrics missing for slice " + id);
      cmp.optomics_accuracy.push_back(it->second);
    }
  }
  write_text_file(paths.report_txt, build_report_text(cmp, hash));
  write_text_file(paths.report_csv, build_report_csv(cmp, hash));
}

}  // namespace

ArtifactPaths::ArtifactPaths(const std::string& out_dir) : out_(out_dir) {
  study_dir = out_ + "/study";
  study_manifest = study_dir + "/manifest.csv";
  standardized_dir = out_ + "/standardized";
  partition_csv = out_ + "/partition.csv";
  centers_csv = out_ + "/centers.csv";
  cv_cube_csv = out_ + "/cv_cube.csv";
  cv_summary_csv = out_ + "/cv_summary.csv";
  cv_choice_csv = out_ + "/cv_choice.csv";
  threshold_model_csv = out_ + "/threshold_model.csv";
  threshold_metrics_csv = out_ + "/threshold_metrics.csv";
  optomics_metrics_csv = out_ + "/optomics_metrics.csv";
  patch_predictions_csv = out_ + "/patch_predictions.csv";
  probmap_dir = out_ + "/probmap";
  report_txt = out_ + "/report.txt";
  report_csv = out_ + "/report.csv";
}

std::string ArtifactPaths::features_csv(double scale_mm) const {
  return out_ + "/features_" + scale_tag(scale_mm) + "mm.csv";
}
std::string ArtifactPaths::model_path(double scale_mm) const {
  return out_ + "/model_" + scale_tag(scale_mm) + "mm.optx";
}
std::string ArtifactPaths::standardized_grid(const std::string& slice_id) const {
  return standardized_dir + "/" + slice_id + ".opmp";
}
std::string ArtifactPaths::threshold_mask_png(const std::string& slice_id) const {
  return out_ + "/masks/" + slice_id + "_threshold.png";
}
std::string ArtifactPaths::probmap_grid(const std::string& slice_id) const {
  return probmap_dir + "/" + slice_id + ".opmp";
}
std::string ArtifactPaths::probmap_png(const std::string& slice_id) const {
  return probmap_dir + "/" + slice_id + "_heatmap.png";
}

std::string manifest_path(const RunConfig& cfg) {
  if (!cfg.manifest.empty()) return cfg.manifest;
  return ArtifactPaths(cfg.out_dir).study_manifest;
}

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("OPTOMX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_phantom(const RunConfig& cfg) { with_stage("phantom", [&] { stage_phantom(cfg); }); }
void run_preprocess(const RunConfig& cfg) { with_stage("preprocess", [&] { stage_preprocess(cfg); }); }
void run_partition(const RunConfig& cfg) { with_stage("partition", [&] { stage_partition(cfg); }); }
void run_sample(const RunConfig& cfg) { with_stage("sample", [&] { stage_sample(cfg); }); }
void run_extract(const RunConfig& cfg) { with_stage("extract", [&] { stage_extract(cfg); }); }
void run_cv(const RunConfig& cfg) { with_stage("cv", [&] { stage_cv(cfg); }); }
void run_train(const RunConfig& cfg) { with_stage("train", [&] { stage_train(cfg); }); }
void run_eval_threshold(const RunConfig& cfg) { with_stage("eval-threshold", [&] { stage_eval_threshold(cfg); }); }
void run_eval_optomics(const RunConfig& cfg) { with_stage("eval-optomics", [&] { stage_eval_optomics(cfg); }); }
void run_probmap(const RunConfig& cfg) { with_stage("probmap", [&] { stage_probmap(cfg); }); }
void run_report(const RunConfig& cfg) { with_stage("report", [&] { stage_report(cfg); }); }

void run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  ensure_dir(cfg.out_dir);
  if (cfg.manifest.empty()) run_phantom(cfg);
  run_preprocess(cfg);
  run_partition(cfg);
  run_sample(cfg);
  run_extract(cfg);
  run_cv(cfg);
  run_train(cfg);
  run_eval_threshold(cfg);
  run_eval_optomics(cfg);
  run_probmap(cfg);
  run_report(cfg);
}

}  // namespace optomx

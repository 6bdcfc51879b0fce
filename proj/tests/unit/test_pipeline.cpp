#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "optomx/features.hpp"
#include "optomx/imageio.hpp"
#include "optomx/pipeline.hpp"

using namespace optomx;
namespace fs = std::filesystem;

namespace {

// Small study and grid so the whole pipeline runs in seconds.
RunConfig smoke_config(const std::string& out_dir) {
  RunConfig cfg = parse_config(R"(
seed = 424242
patch_sizes_mm = [0.5, 0.88]
cv_scale_mm = 0.88
patches_per_slice = 6
ng = 16
k_min = 2
k_max = 6
k_step = 2
selectors = ["MRMR", "FSCR"]
classifiers = ["KNN", "BY"]
phantom_patients = 3
phantom_slices_per_group = 4
phantom_image_size = 96
)");
  cfg.out_dir = out_dir;
  cfg.threads = 1;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in, path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::vector<std::string> data_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> out;
  std::getline(in, line);  // hash comment
  std::getline(in, line);  // header
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

TEST_CASE("artifact paths derive from the output directory") {
  const ArtifactPaths p("/tmp/run");
  CHECK(p.study_manifest == "/tmp/run/study/manifest.csv");
  CHECK(p.partition_csv == "/tmp/run/partition.csv");
  CHECK(p.features_csv(0.88) == "/tmp/run/features_0.88mm.csv");
  CHECK(p.features_csv(1.81) == "/tmp/run/features_1.81mm.csv");
  CHECK(p.model_path(0.5) == "/tmp/run/model_0.5mm.optx");
  CHECK(p.standardized_grid("P01S1") == "/tmp/run/standardized/P01S1.opmp");
  CHECK(p.probmap_grid("X") == "/tmp/run/probmap/X.opmp");
  CHECK(p.probmap_png("X") == "/tmp/run/probmap/X_heatmap.png");
  CHECK(p.threshold_mask_png("X") == "/tmp/run/masks/X_threshold.png");

  RunConfig cfg;
  cfg.out_dir = "/tmp/run";
  CHECK(manifest_path(cfg) == "/tmp/run/study/manifest.csv");
  cfg.manifest = "elsewhere.csv";
  CHECK(manifest_path(cfg) == "elsewhere.csv");
}

TEST_CASE("thread resolution prefers config, then environment") {
  CHECK(resolve_threads(4) == 4);
  setenv("OPTOMX_THREADS", "3", 1);
  CHECK(resolve_threads(0) == 3);
  CHECK(resolve_threads(2) == 2);  // explicit config wins
  setenv("OPTOMX_THREADS", "junk", 1);
  CHECK(resolve_threads(0) >= 1);  // falls through to hardware
  unsetenv("OPTOMX_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("the reduced pipeline runs end to end and reruns byte-identically") {
  testutil::TempDir tmp("pipeline");
  const std::string dir_a = tmp.path() + "/a";
  const std::string dir_b = tmp.path() + "/b";
  RunConfig cfg = smoke_config(dir_a);
  const std::uint32_t hash = config_hash(cfg);
  run_pipeline(cfg);

  const ArtifactPaths paths(dir_a);

  // Partition: every slice exactly once, per-group 3 train + 1 test.
  const auto part_lines = data_lines(slurp(paths.partition_csv));
  REQUIRE(part_lines.size() == 12);
  std::set<std::string> train_ids, test_ids;
  for (const auto& line : part_lines) {
    const auto cells = split(line);
    REQUIRE(cells.size() == 2);
    if (cells[1] == "train")
      train_ids.insert(cells[0]);
    else
      test_ids.insert(cells[0]);
  }
  CHECK(train_ids.size() == 9);
  CHECK(test_ids.size() == 3);

  // Centers: patches_per_slice rows for each of the 12 slices.
  const auto center_lines = data_lines(slurp(paths.centers_csv));
  CHECK(center_lines.size() == 12 * 6);

  // Feature tables: full width, stamped with this run's hash.
  for (double scale : cfg.patch_sizes_mm) {
    std::uint32_t stored = 0;
    const FeatureTable t = read_feature_csv(paths.features_csv(scale), stored);
    CHECK(stored == hash);
    CHECK(t.cols() == 1472);
    CHECK(t.rows() == 12 * 6);
    for (const auto& m : t.meta) CHECK(m.size_mm == scale);
    int tumor = 0;
    for (const auto& m : t.meta) tumor += m.label;
    CHECK(tumor > 0);
    CHECK(tumor < static_cast<int>(t.rows()));
  }

  // Grid search outputs and the selected cell.
  const auto cube_lines = data_lines(slurp(paths.cv_cube_csv));
  CHECK(cube_lines.size() == 2 * 2 * 3 * 9);  // clf x sel x k x folds
  const auto summary_lines = data_lines(slurp(paths.cv_summary_csv));
  CHECK(summary_lines.size() == 2 * 2 * 3);
  const auto choice_lines = data_lines(slurp(paths.cv_choice_csv));
  REQUIRE(choice_lines.size() == 1);
  const auto choice = split(choice_lines[0]);
  REQUIRE(choice.size() == 5);
  CHECK((choice[0] == "KNN" || choice[0] == "BY"));
  CHECK((choice[1] == "MRMR" || choice[1] == "FSCR"));
  const int k = std::atoi(choice[2].c_str());
  CHECK(k >= 2);
  CHECK(k <= 6);

  // Per-scale models trained on the train slices.
  CHECK(fs::exists(paths.model_path(0.5)));
  CHECK(fs::exists(paths.model_path(0.88)));

  // Threshold baseline artifacts.
  const auto thr_model = data_lines(slurp(paths.threshold_model_csv));
  REQUIRE(thr_model.size() == 1);
  const auto thr_metrics = data_lines(slurp(paths.threshold_metrics_csv));
  REQUIRE(thr_metrics.size() == 3);
  for (const auto& line : thr_metrics) {
    const auto cells = split(line);
    REQUIRE(cells.size() == 6);
    CHECK(test_ids.count(cells[0]) == 1);
    const double acc = std::strtod(cells[1].c_str(), nullptr);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    CHECK(fs::exists(paths.threshold_mask_png(cells[0])));
  }

  // Patch predictions: per-scale probabilities and their exact mean.
  const std::string pred_text = slurp(paths.patch_predictions_csv);
  CHECK(pred_text.find(",p_0.5mm,p_0.88mm,fused,predicted") !=
        std::string::npos);
  const auto pred_lines = data_lines(pred_text);
  CHECK(pred_lines.size() == 3 * 6);
  for (const auto& line : pred_lines) {
    const auto cells = split(line);
    REQUIRE(cells.size() == 9);
    const double a = std::strtod(cells[5].c_str(), nullptr);
    const double b = std::strtod(cells[6].c_str(), nullptr);
    const double fused = std::strtod(cells[7].c_str(), nullptr);
    CHECK(fused == (a + b) / 2.0);
    CHECK((cells[8] == (fused >= 0.5 ? "1" : "0")));
  }
  const auto opt_metrics = data_lines(slurp(paths.optomics_metrics_csv));
  REQUIRE(opt_metrics.size() == 3);
  for (const auto& line : opt_metrics) {
    const auto cells = split(line);
    REQUIRE(cells.size() == 3);
    CHECK(cells[1] == "6");
    const double acc = std::strtod(cells[2].c_str(), nullptr);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
  }

  // Probability maps for every test slice, clipped to [0, 1].
  for (const auto& id : test_ids) {
    std::uint32_t stored = 0;
    const GrayImage grid =
        read_float_grid(paths.probmap_grid(id), stored, cfg.pixel_pitch_mm);
    CHECK(stored == hash);
    CHECK(grid.width() == 96);
    for (double v : grid.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(fs::exists(paths.probmap_png(id)));
  }

  // Report pair.
  const std::string report = slurp(paths.report_txt);
  CHECK(report.find("# config_hash=") == 0);
  CHECK(report.find("paired two-sided t-test") != std::string::npos);
  const std::string report_csv = slurp(paths.report_csv);
  CHECK(report_csv.find("p_value,") != std::string::npos);

  // Rerunning the evaluation tail reproduces the files byte for byte.
  const std::string opt_before = slurp(paths.optomics_metrics_csv);
  const std::string pred_before = slurp(paths.patch_predictions_csv);
  const std::string report_before = slurp(paths.report_txt);
  run_eval_optomics(cfg);
  run_report(cfg);
  CHECK(slurp(paths.optomics_metrics_csv) == opt_before);
  CHECK(slurp(paths.patch_predictions_csv) == pred_before);
  CHECK(slurp(paths.report_txt) == report_before);

  // A fresh run at a different thread count writes identical artifacts.
  RunConfig cfg_b = smoke_config(dir_b);
  cfg_b.threads = 3;
  run_pipeline(cfg_b);
  const ArtifactPaths pb(dir_b);
  const std::pair<std::string, std::string> file_pairs[] = {
      {paths.partition_csv, pb.partition_csv},
      {paths.centers_csv, pb.centers_csv},
      {paths.features_csv(0.5), pb.features_csv(0.5)},
      {paths.features_csv(0.88), pb.features_csv(0.88)},
      {paths.cv_cube_csv, pb.cv_cube_csv},
      {paths.cv_summary_csv, pb.cv_summary_csv},
      {paths.cv_choice_csv, pb.cv_choice_csv},
      {paths.model_path(0.5), pb.model_path(0.5)},
      {paths.model_path(0.88), pb.model_path(0.88)},
      {paths.threshold_model_csv, pb.threshold_model_csv},
      {paths.threshold_metrics_csv, pb.threshold_metrics_csv},
      {paths.optomics_metrics_csv, pb.optomics_metrics_csv},
      {paths.patch_predictions_csv, pb.patch_predictions_csv},
      {paths.report_txt, pb.report_txt},
      {paths.report_csv, pb.report_csv},
  };
  for (const auto& [a, b] : file_pairs) CHECK(slurp(a) == slurp(b));
  for (const auto& id : test_ids) {
    CHECK(slurp(paths.probmap_grid(id)) == slurp(pb.probmap_grid(id)));
    CHECK(slurp(paths.probmap_png(id)) == slurp(pb.probmap_png(id)));
    CHECK(slurp(paths.threshold_mask_png(id)) ==
          slurp(pb.threshold_mask_png(id)));
  }
  for (const auto& line : part_lines) {
    const std::string id = split(line)[0];
    CHECK(slurp(paths.standardized_grid(id)) ==
          slurp(pb.standardized_grid(id)));
  }

  // Changing a science parameter makes stored artifacts unusable.
  RunConfig tampered = smoke_config(dir_a);
  tampered.ng = 24;
  try {
    run_cv(tampered);
    FAIL("expected a configuration hash mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigHashMismatch);
    CHECK(std::string(e.what()).find("[stage cv]") != std::string::npos);
  }
}

TEST_CASE("stages fail attributably when their inputs are missing") {
  testutil::TempDir tmp("pipeline-missing");
  RunConfig cfg = smoke_config(tmp.path() + "/empty");
  try {
    run_cv(cfg);
    FAIL("expected a missing-input failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
    CHECK(std::string(e.what()).find("[stage cv]") != std::string::npos);
  }
  try {
    run_train(cfg);
    FAIL("expected a missing-input failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("[stage train]") != std::string::npos);
  }
}

#pragma once

#include <string>

#include "optomx/config.hpp"

namespace optomx {

// Pipeline stages, each individually runnable and composable through
// on-disk artifacts under cfg.out_dir. Every artifact embeds the config
// hash; stages refuse to mix artifacts from different configurations
// (ConfigHashMismatch). Errors from any stage are re-thrown with a
// "[stage <name>]" prefix so failures are attributable.

// Artifact locations, all relative to out_dir.
struct ArtifactPaths {
  explicit ArtifactPaths(const std::string& out_dir);

  std::string study_dir;       // phantom output
  std::string study_manifest;  // phantom output manifest
  std::string standardized_dir;
  std::string partition_csv;
  std::string centers_csv;
  std::string cv_cube_csv;
  std::string cv_summary_csv;
  std::string cv_choice_csv;
  std::string threshold_model_csv;
  std::string threshold_metrics_csv;
  std::string optomics_metrics_csv;
  std::string patch_predictions_csv;
  std::string probmap_dir;
  std::string report_txt;
  std::string report_csv;

  std::string features_csv(double scale_mm) const;
  std::string model_path(double scale_mm) const;
  std::string standardized_grid(const std::string& slice_id) const;
  std::string threshold_mask_png(const std::string& slice_id) const;
  std::string probmap_grid(const std::string& slice_id) const;
  std::string probmap_png(const std::string& slice_id) const;

 private:
  std::string out_;
};

// Resolves the study manifest: cfg.manifest if set, else the phantom
// study written by run_phantom under out_dir.
std::string manifest_path(const RunConfig& cfg);

// Worker count: the configured value if positive, else the OPTOMX_THREADS
// environment variable, else the hardware concurrency.
int resolve_threads(int configured);

void run_phantom(const RunConfig& cfg);
void run_preprocess(const RunConfig& cfg);
void run_partition(const RunConfig& cfg);
void run_sample(const RunConfig& cfg);
void run_extract(const RunConfig& cfg);
void run_cv(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_eval_threshold(const RunConfig& cfg);
void run_eval_optomics(const RunConfig& cfg);
void run_probmap(const RunConfig& cfg);
void run_report(const RunConfig& cfg);

// phantom (when no manifest is configured) + every stage above, in order.
void run_pipeline(const RunConfig& cfg);

}  // namespace optomx

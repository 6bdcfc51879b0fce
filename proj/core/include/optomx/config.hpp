#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/classifiers.hpp"
#include "optomx/phantom.hpp"
#include "optomx/selection.hpp"

namespace optomx {

// Every tunable of the pipeline, flat key = value style. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct RunConfig {
  // paths & execution (not part of the config hash)
  std::string manifest;
  std::string out_dir = "out";
  int threads = 0;  // 0 = OPTOMX_THREADS env or hardware count

  std::uint64_t seed = 1234;
  double pixel_pitch_mm = kDefaultPixelPitchMm;

  // patch sampling / features
  std::vector<double> patch_sizes_mm = {0.88, 1.39, 1.81};
  int patches_per_slice = 24;
  int ng = 32;
  double train_fraction = 0.75;

  // cross-validation grid
  double cv_scale_mm = 1.81;
  int k_min = 5;
  int k_max = 100;
  int k_step = 5;
  double plateau_c = 1.5;
  std::vector<std::string> selectors = {"MRMR", "FSCR", "CHSQ", "GINI",
                                        "MIM",  "SRCC", "PRCC"};
  std::vector<std::string> classifiers = {"RF", "KNN", "DT", "SVM",
                                          "BST", "BY",  "DA"};

  ClassifierParams clf;

  // phantom generation
  PhantomConfig phantom;

  void validate() const;
  std::vector<SelectorMethod> selector_methods() const;
  std::vector<ModelKind> classifier_kinds() const;
};

// Parses flat TOML-compatible text: `key = value` lines, # comments,
// doubles/ints/bools/quoted strings/[...] arrays. Throws UnknownKey for
// unrecognized keys, BadConfig for malformed values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical serialization of every result-affecting field in fixed order.
// Paths and thread counts are excluded so identical science on different
// machines or thread counts hashes identically.
std::string canonical_config(const RunConfig& cfg);
std::uint32_t config_hash(const RunConfig& cfg);

}  // namespace optomx

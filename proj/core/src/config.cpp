#include "optomx/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "optomx/csv.hpp"
#include "optomx/error.hpp"
#include "optomx/rng.hpp"

namespace optomx {
namespace {

struct RawValue {
  enum Kind { Number, Boolean, String, NumberList, StringList, EmptyList } kind;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    fail(ErrorCode::BadConfig, "config: bad number for '" + key + "': " + tok);
  return v;
}

RawValue parse_value(const std::string& raw, const std::string& key) {
  RawValue v;
  const std::string s = trim(raw);
  if (s.empty()) fail(ErrorCode::BadConfig, "config: empty value for '" + key + "'");
  if (s.front() == '[') {
    if (s.back() != ']')
      fail(ErrorCode::BadConfig, "config: unterminated array for '" + key + "'");
    const std::string inner = s.substr(1, s.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_quotes = false;
    for (char c : inner) {
      if (c == '"') in_quotes = !in_quotes;
      if (c == ',' && !in_quotes) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!trim(cur).empty() || !items.empty()) items.push_back(trim(cur));
    // "[]" carries no element to reveal its type, so it parses as a kind
    // both array converters accept; validation decides whether an empty
    // list is legal for the key.
    if (items.empty()) {
      v.kind = RawValue::EmptyList;
      return v;
    }
    bool strings = !items.front().empty() && items.front().front() == '"';
    v.kind = strings ? RawValue::StringList : RawValue::NumberList;
    for (const auto& item : items) {
      if (item.empty())
        fail(ErrorCode::BadConfig, "config: empty array element for '" + key + "'");
      if (strings) {
        if (item.size() < 2 || item.front() != '"' || item.back() != '"')
          fail(ErrorCode::BadConfig, "config: bad string element for '" + key + "'");
        v.strings.push_back(item.substr(1, item.size() - 2));
      } else {
        v.numbers.push_back(parse_number(item, key));
      }
    }
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail(ErrorCode::BadConfig, "config: unterminated string for '" + key + "'");
    v.kind = RawValue::String;
    v.text = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = RawValue::Boolean;
    v.boolean = (s == "true");
    return v;
  }
  v.kind = RawValue::Number;
  v.number = parse_number(s, key);
  return v;
}

int as_int(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Number || v.number != std::floor(v.number))
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be an integer");
  return static_cast<int>(v.number);
}

double as_double(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Number)
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be a number");
  return v.number;
}

std::uint64_t as_u64(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Number || v.number < 0.0 ||
      v.number != std::floor(v.number))
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be a nonnegative integer");
  return static_cast<std::uint64_t>(v.number);
}

bool as_bool(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::Boolean)
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be true or false");
  return v.boolean;
}

std::string as_string(const RawValue& v, const std::string& key) {
  if (v.kind != RawValue::String)
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be a quoted string");
  return v.text;
}

std::vector<double> as_doubles(const RawValue& v, const std::string& key) {
  if (v.kind == RawValue::EmptyList) return {};
  if (v.kind != RawValue::NumberList)
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be a number array");
  return v.numbers;
}

std::vector<std::string> as_strings(const RawValue& v, const std::string& key) {
  if (v.kind == RawValue::EmptyList) return {};
  if (v.kind != RawValue::StringList)
    fail(ErrorCode::BadConfig, "config: '" + key + "' must be a string array");
  return v.strings;
}

using Setter = std::function<void(RunConfig&, const RawValue&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"manifest", [](RunConfig& c, const RawValue& v, const std::string& k) { c.manifest = as_string(v, k); }},
      {"out_dir", [](RunConfig& c, const RawValue& v, const std::string& k) { c.out_dir = as_string(v, k); }},
      {"threads", [](RunConfig& c, const RawValue& v, const std::string& k) { c.threads = as_int(v, k); }},
      {"seed", [](RunConfig& c, const RawValue& v, const std::string& k) { c.seed = as_u64(v, k); }},
      {"pixel_pitch_mm", [](RunConfig& c, const RawValue& v, const std::string& k) { c.pixel_pitch_mm = as_double(v, k); }},
      {"patch_sizes_mm", [](RunConfig& c, const RawValue& v, const std::string& k) { c.patch_sizes_mm = as_doubles(v, k); }},
      {"patches_per_slice", [](RunConfig& c, const RawValue& v, const std::string& k) { c.patches_per_slice = as_int(v, k); }},
      {"ng", [](RunConfig& c, const RawValue& v, const std::string& k) { c.ng = as_int(v, k); }},
      {"train_fraction", [](RunConfig& c, const RawValue& v, const std::string& k) { c.train_fraction = as_double(v, k); }},
      {"cv_scale_mm", [](RunConfig& c, const RawValue& v, const std::string& k) { c.cv_scale_mm = as_double(v, k); }},
      {"k_min", [](RunConfig& c, const RawValue& v, const std::string& k) { c.k_min = as_int(v, k); }},
      {"k_max", [](RunConfig& c, const RawValue& v, const std::string& k) { c.k_max = as_int(v, k); }},
      {"k_step", [](RunConfig& c, const RawValue& v, const std::string& k) { c.k_step = as_int(v, k); }},
      {"plateau_c", [](RunConfig& c, const RawValue& v, const std::string& k) { c.plateau_c = as_double(v, k); }},
      {"selectors", [](RunConfig& c, const RawValue& v, const std::string& k) { c.selectors = as_strings(v, k); }},
      {"classifiers", [](RunConfig& c, const RawValue& v, const std::string& k) { c.classifiers = as_strings(v, k); }},
      {"svm_c", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.svm_c = as_double(v, k); }},
      {"svm_gamma", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.svm_gamma = as_double(v, k); }},
      {"svm_tol", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.svm_tol = as_double(v, k); }},
      {"knn_k", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.knn_k = as_int(v, k); }},
      {"tree_max_depth", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.tree_max_depth = as_int(v, k); }},
      {"tree_min_leaf", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.tree_min_leaf = as_int(v, k); }},
      {"rf_trees", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.rf_trees = as_int(v, k); }},
      {"rf_bootstrap", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.rf_bootstrap = as_bool(v, k); }},
      {"rf_mtry", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.rf_mtry = as_int(v, k); }},
      {"bst_rounds", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.bst_rounds = as_int(v, k); }},
      {"nb_var_floor", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.nb_var_floor = as_double(v, k); }},
      {"lda_ridge", [](RunConfig& c, const RawValue& v, const std::string& k) { c.clf.lda_ridge = as_double(v, k); }},
      {"phantom_patients", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.patients = as_int(v, k); }},
      {"phantom_slices_per_group", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.slices_per_group = as_int(v, k); }},
      {"phantom_image_size", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.image_size = as_int(v, k); }},
      {"phantom_dose_multipliers",
       [](RunConfig& c, const RawValue& v, const std::string& k) {
         auto list = as_doubles(v, k);
         if (list.size() != 3)
           fail(ErrorCode::BadConfig, "config: '" + k + "' needs exactly 3 values");
         for (int i = 0; i < 3; ++i) c.phantom.dose_multipliers[i] = list[i];
       }},
      {"phantom_target_sbr", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.target_sbr = as_double(v, k); }},
      {"phantom_background_mean", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.background_mean = as_double(v, k); }},
      {"phantom_calibration_value", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.calibration_value = as_double(v, k); }},
      {"phantom_intensity_overlap", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.intensity_overlap = as_double(v, k); }},
      {"phantom_normal_amplitude", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.normal_amplitude = as_double(v, k); }},
      {"phantom_normal_corr_px", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.normal_corr_px = as_double(v, k); }},
      {"phantom_tumor_amplitude", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.tumor_amplitude = as_double(v, k); }},
      {"phantom_tumor_corr_px", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.tumor_corr_px = as_double(v, k); }},
      {"phantom_blotch_count", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.blotch_count = as_int(v, k); }},
      {"phantom_blotch_amplitude", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.blotch_amplitude = as_double(v, k); }},
      {"phantom_noise_sd", [](RunConfig& c, const RawValue& v, const std::string& k) { c.phantom.noise_sd = as_double(v, k); }},
  };
  return table;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

std::string join_doubles(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_real(v[i]);
  }
  return out + "]";
}

std::string join_strings(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += quote(v[i]);
  }
  return out + "]";
}

}  // namespace

void RunConfig::validate() const {
  if (ng < 2) fail(ErrorCode::BadConfig, "config: ng must be >= 2");
  if (patch_sizes_mm.empty())
    fail(ErrorCode::BadConfig, "config: patch_sizes_mm must not be empty");
  for (double s : patch_sizes_mm)
    if (!(s > 0.0))
      fail(ErrorCode::BadConfig, "config: patch sizes must be positive");
  if (!(pixel_pitch_mm > 0.0))
    fail(ErrorCode::BadConfig, "config: pixel_pitch_mm must be > 0");
  if (patches_per_slice < 2)
    fail(ErrorCode::BadConfig, "config: patches_per_slice must be >= 2");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    fail(ErrorCode::BadConfig, "config: train_fraction must be in (0, 1)");
  bool scale_known = false;
  for (double s : patch_sizes_mm)
    if (std::abs(s - cv_scale_mm) < 1e-9) scale_known = true;
  if (!scale_known)
    fail(ErrorCode::BadConfig, "config: cv_scale_mm must be one of patch_sizes_mm");
  if (k_min < 1 || k_max < k_min || k_step < 1)
    fail(ErrorCode::BadConfig, "config: need 1 <= k_min <= k_max and k_step >= 1");
  if (!(plateau_c > 0.0))
    fail(ErrorCode::BadConfig, "config: plateau_c must be > 0");
  if (selectors.empty() || classifiers.empty())
    fail(ErrorCode::BadConfig, "config: selectors and classifiers must not be empty");
  selector_methods();
  classifier_kinds();
  if (!(clf.svm_c > 0.0) || !(clf.svm_tol > 0.0) || clf.svm_gamma < 0.0)
    fail(ErrorCode::BadConfig, "config: bad SVM parameters");
  if (clf.knn_k < 1) fail(ErrorCode::BadConfig, "config: knn_k must be >= 1");
  if (clf.tree_max_depth < 1 || clf.tree_min_leaf < 1)
    fail(ErrorCode::BadConfig, "config: bad tree parameters");
  if (clf.rf_trees < 1 || clf.rf_mtry < 0)
    fail(ErrorCode::BadConfig, "config: bad forest parameters");
  if (clf.bst_rounds < 1)
    fail(ErrorCode::BadConfig, "config: bst_rounds must be >= 1");
  if (!(clf.nb_var_floor > 0.0) || clf.lda_ridge < 0.0)
    fail(ErrorCode::BadConfig, "config: bad NB/LDA parameters");
  phantom.validate();
}

std::vector<SelectorMethod> RunConfig::selector_methods() const {
  std::vector<SelectorMethod> out;
  for (const auto& name : selectors) out.push_back(selector_from_name(name));
  return out;
}

std::vector<ModelKind> RunConfig::classifier_kinds() const {
  std::vector<ModelKind> out;
  for (const auto& name : classifiers) out.push_back(classifier_from_name(name));
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::BadConfig,
           "config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const auto it = setters().find(key);
    if (it == setters().end())
      fail(ErrorCode::UnknownKey, "config: unknown key '" + key + "'");
    it->second(cfg, parse_value(body.substr(eq + 1), key), key);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const RunConfig& cfg) {
  std::string out;
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "pixel_pitch_mm = " + format_real(cfg.pixel_pitch_mm) + "\n";
  out += "patch_sizes_mm = " + join_doubles(cfg.patch_sizes_mm) + "\n";
  out += "patches_per_slice = " + std::to_string(cfg.patches_per_slice) + "\n";
  out += "ng = " + std::to_string(cfg.ng) + "\n";
  out += "train_fraction = " + format_real(cfg.train_fraction) + "\n";
  out += "cv_scale_mm = " + format_real(cfg.cv_scale_mm) + "\n";
  out += "k_min = " + std::to_string(cfg.k_min) + "\n";
  out += "k_max = " + std::to_string(cfg.k_max) + "\n";
  out += "k_step = " + std::to_string(cfg.k_step) + "\n";
  out += "plateau_c = " + format_real(cfg.plateau_c) + "\n";
  out += "selectors = " + join_strings(cfg.selectors) + "\n";
  out += "classifiers = " + join_strings(cfg.classifiers) + "\n";
  out += "svm_c = " + format_real(cfg.clf.svm_c) + "\n";
  out += "svm_gamma = " + format_real(cfg.clf.svm_gamma) + "\n";
  out += "svm_tol = " + format_real(cfg.clf.svm_tol) + "\n";
  out += "knn_k = " + std::to_string(cfg.clf.knn_k) + "\n";
  out += "tree_max_depth = " + std::to_string(cfg.clf.tree_max_depth) + "\n";
  out += "tree_min_leaf = " + std::to_string(cfg.clf.tree_min_leaf) + "\n";
  out += "rf_trees = " + std::to_string(cfg.clf.rf_trees) + "\n";
  out += std::string("rf_bootstrap = ") + (cfg.clf.rf_bootstrap ? "true" : "false") + "\n";
  out += "rf_mtry = " + std::to_string(cfg.clf.rf_mtry) + "\n";
  out += "bst_rounds = " + std::to_string(cfg.clf.bst_rounds) + "\n";
  out += "nb_var_floor = " + format_real(cfg.clf.nb_var_floor) + "\n";
  out += "lda_ridge = " + format_real(cfg.clf.lda_ridge) + "\n";
  out += "phantom_patients = " + std::to_string(cfg.phantom.patients) + "\n";
  out += "phantom_slices_per_group = " + std::to_string(cfg.phantom.slices_per_group) + "\n";
  out += "phantom_image_size = " + std::to_string(cfg.phantom.image_size) + "\n";
  out += "phantom_dose_multipliers = " +
         join_doubles({cfg.phantom.dose_multipliers[0], cfg.phantom.dose_multipliers[1],
                       cfg.phantom.dose_multipliers[2]}) +
         "\n";
  out += "phantom_target_sbr = " + format_real(cfg.phantom.target_sbr) + "\n";
  out += "phantom_background_mean = " + format_real(cfg.phantom.background_mean) + "\n";
  out += "phantom_calibration_value = " + format_real(cfg.phantom.calibration_value) + "\n";
  out += "phantom_intensity_overlap = " + format_real(cfg.phantom.intensity_overlap) + "\n";
  out += "phantom_normal_amplitude = " + format_real(cfg.phantom.normal_amplitude) + "\n";
  out += "phantom_normal_corr_px = " + format_real(cfg.phantom.normal_corr_px) + "\n";
  out += "phantom_tumor_amplitude = " + format_real(cfg.phantom.tumor_amplitude) + "\n";
  out += "phantom_tumor_corr_px = " + format_real(cfg.phantom.tumor_corr_px) + "\n";
  out += "phantom_blotch_count = " + std::to_string(cfg.phantom.blotch_count) + "\n";
  out += "phantom_blotch_amplitude = " + format_real(cfg.phantom.blotch_amplitude) + "\n";
  out += "phantom_noise_sd = " + format_real(cfg.phantom.noise_sd) + "\n";
  return out;
}

std::uint32_t config_hash(const RunConfig& cfg) {
  const std::uint64_t h = fnv1a64(canonical_config(cfg));
  return static_cast<std::uint32_t>(h >> 32) ^ static_cast<std::uint32_t>(h);
}

}  // namespace optomx

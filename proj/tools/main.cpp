// optomx: tissue-classification pipeline over wide-field fluorescence
// studies. Subcommands map 1:1 to pipeline stages and compose through the
// artifacts they leave in --out.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "optomx/error.hpp"
#include "optomx/pipeline.hpp"

namespace {

int exit_code_for(optomx::ErrorCategory cat) {
  switch (cat) {
    case optomx::ErrorCategory::Config:
      return 2;
    case optomx::ErrorCategory::Data:
      return 3;
    case optomx::ErrorCategory::Numeric:
      return 4;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "optomx - texture-based tumor classification for fluorescence "
      "images"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_override;
  std::string manifest_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;
  int threads_override = 0;

  app.add_option("--config", config_path, "Flat key = value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_override, "Output directory (overrides config)");
  app.add_option("--manifest", manifest_override,
                 "Study manifest CSV (overrides config)");
  app.add_option("--seed", seed_override, "Seed (overrides config)")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--threads", threads_override,
                 "Worker threads (0 = OPTOMX_THREADS or hardware)");

  struct Sub {
    const char* name;
    const char* help;
    void (*fn)(const optomx::RunConfig&);
  };
  const Sub subs[] = {
      {"phantom", "Generate a synthetic study under <out>/study", optomx::run_phantom},
      {"preprocess", "Standardize every slice to [0,1] float grids", optomx::run_preprocess},
      {"partition", "Split slices into train/test per dose group", optomx::run_partition},
      {"sample", "Draw shared patch centers per slice", optomx::run_sample},
      {"extract", "Compute per-patch feature tables at every scale", optomx::run_extract},
      {"cv", "Leave-one-slice-out grid search and model choice", optomx::run_cv},
      {"train", "Fit the chosen pipeline per scale on all training slices", optomx::run_train},
      {"eval-threshold", "Intensity-threshold baseline on test slices", optomx::run_eval_threshold},
      {"eval-optomics", "Patch classification on test slices, fused scales", optomx::run_eval_optomics},
      {"probmap", "Interpolated tumor-probability maps and heatmaps", optomx::run_probmap},
      {"report", "Paired comparison report of both methods", optomx::run_report},
      {"run", "Full pipeline end to end", optomx::run_pipeline},
  };
  for (const Sub& s : subs) app.add_subcommand(s.name, s.help);

  CLI11_PARSE(app, argc, argv);

  try {
    optomx::RunConfig cfg;
    if (!config_path.empty()) cfg = optomx::load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!manifest_override.empty()) cfg.manifest = manifest_override;
    if (have_seed) cfg.seed = seed_override;
    if (threads_override > 0) cfg.threads = threads_override;
    cfg.validate();

    for (const Sub& s : subs) {
      if (app.got_subcommand(s.name)) {
        s.fn(cfg);
        std::fprintf(stderr, "optomx %s: done (config %08x)\n", s.name,
                     optomx::config_hash(cfg));
        return 0;
      }
    }
    std::fprintf(stderr, "optomx: no subcommand\n");
    return 2;
  } catch (const optomx::Error& e) {
    std::fprintf(stderr, "optomx: %s\n", e.what());
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "optomx: %s\n", e.what());
    return 3;
  }
}

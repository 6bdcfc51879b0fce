// Microbenchmarks for the hot paths: per-patch feature extraction, the
// individual texture matrices, filtering, spline fitting/evaluation,
// classifier training and feature ranking.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "optomx/classifiers.hpp"
#include "optomx/features.hpp"
#include "optomx/filterbank.hpp"
#include "optomx/probmap.hpp"
#include "optomx/selection.hpp"

using namespace optomx;

namespace {

double unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

GrayImage random_patch(int side, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  GrayImage img(side, side);
  for (auto& v : img.values()) v = unit(gen);
  return img;
}

DiscretePatch random_levels(int side, int ng, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  DiscretePatch dp;
  dp.width = dp.height = side;
  dp.num_levels = ng;
  dp.levels.resize(static_cast<std::size_t>(side) * side);
  for (auto& v : dp.levels) v = 1 + static_cast<int>(gen() % ng);
  return dp;
}

struct Blobs {
  std::vector<double> x;
  std::vector<int> y;
  std::size_t rows, cols;
};

Blobs random_blobs(std::size_t per_class, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto normal = [&] {
    const double u = std::max(unit(gen), 1e-300), v = unit(gen);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  };
  Blobs b;
  b.rows = 2 * per_class;
  b.cols = dim;
  for (std::size_t i = 0; i < b.rows; ++i) {
    const int label = i < per_class ? 0 : 1;
    b.y.push_back(label);
    for (std::size_t d = 0; d < dim; ++d)
      b.x.push_back((label ? 1.0 : -1.0) + 0.8 * normal());
  }
  return b;
}

void BM_OptomicVector(benchmark::State& state) {
  const GrayImage patch = random_patch(static_cast<int>(state.range(0)), 1);
  const auto bank = default_bank();
  for (auto _ : state)
    benchmark::DoNotOptimize(optomic_vector(patch, bank, 32));
}

void BM_ImageFeatures(benchmark::State& state) {
  const GrayImage patch = random_patch(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(image_features(patch, 32));
}

void BM_GlcmMatrix(benchmark::State& state) {
  const DiscretePatch dp =
      random_levels(static_cast<int>(state.range(0)), 32, 3);
  for (auto _ : state)
    for (const auto& d : kDirections2D)
      benchmark::DoNotOptimize(glcm_matrix(dp, d[0], d[1]));
}

void BM_GlszmMatrix(benchmark::State& state) {
  const DiscretePatch dp =
      random_levels(static_cast<int>(state.range(0)), 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(glszm_matrix(dp));
}

void BM_LogFilter(benchmark::State& state) {
  const GrayImage patch = random_patch(43, 5);
  const auto bank = default_bank();
  const FilterSpec* log_spec = nullptr;
  for (const auto& spec : bank)
    if (spec.kind == FilterKind::LoG && spec.sigma_mm == 1.5) log_spec = &spec;
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_filter(patch, *log_spec));
}

void BM_BiharmonicFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(6);
  std::vector<double> rows(n), cols(n), vals(n);
  for (int i = 0; i < n; ++i) {
    rows[i] = 200.0 * unit(gen);
    cols[i] = 200.0 * unit(gen);
    vals[i] = unit(gen);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(biharmonic_fit(rows, cols, vals));
}

void BM_BiharmonicEval(benchmark::State& state) {
  std::mt19937_64 gen(7);
  const int n = 48;
  std::vector<double> rows(n), cols(n), vals(n);
  for (int i = 0; i < n; ++i) {
    rows[i] = 128.0 * unit(gen);
    cols[i] = 128.0 * unit(gen);
    vals[i] = unit(gen);
  }
  const SplineModel m = biharmonic_fit(rows, cols, vals);
  const std::vector<std::uint8_t> mask(128 * 128, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(biharmonic_eval(m, 128, 128, mask, 1));
}

void BM_SvmTrain(benchmark::State& state) {
  const Blobs b = random_blobs(static_cast<std::size_t>(state.range(0)), 20, 8);
  const MatrixView X = view_of(b.x, b.rows, b.cols);
  const ClassifierParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(train(ModelKind::SVM, X, b.y, params, 1));
}

void BM_RandomForestTrain(benchmark::State& state) {
  const Blobs b = random_blobs(100, 20, 9);
  const MatrixView X = view_of(b.x, b.rows, b.cols);
  const ClassifierParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(train(ModelKind::RF, X, b.y, params, 1));
}

void BM_MrmrRanking(benchmark::State& state) {
  const Blobs b = random_blobs(100, static_cast<std::size_t>(state.range(0)),
                               10);
  const MatrixView X = view_of(b.x, b.rows, b.cols);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        rank_features(X, b.y, SelectorMethod::MRMR, 8, 30));
}

}  // namespace

BENCHMARK(BM_OptomicVector)->Arg(21)->Arg(43)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ImageFeatures)->Arg(21)->Arg(43)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GlcmMatrix)->Arg(21)->Arg(43)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GlszmMatrix)->Arg(21)->Arg(43)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LogFilter)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BiharmonicFit)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiharmonicEval)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvmTrain)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomForestTrain)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MrmrRanking)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

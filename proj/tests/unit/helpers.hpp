#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "optomx/features.hpp"
#include "optomx/image.hpp"

namespace testutil {

// mt19937 is fully specified by the standard, so raw draws are portable;
// the <random> distributions are not, hence the manual scaling below.
class TestRand {
 public:
  explicit TestRand(std::uint32_t seed) : gen_(seed) {}

  double unit() { return (gen_() >> 5) * (1.0 / 134217728.0); }
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
  int below(int n) { return static_cast<int>(gen_() % static_cast<std::uint32_t>(n)); }
  double normal() {
    // Box-Muller on two raw draws.
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937 gen_;
};

inline optomx::GrayImage random_patch(TestRand& rng, int side,
                                      double pitch = 0.042) {
  optomx::GrayImage img(side, side, pitch);
  for (auto& v : img.values()) v = rng.unit();
  return img;
}

inline optomx::DiscretePatch random_levels(TestRand& rng, int side, int ng) {
  optomx::DiscretePatch dp;
  dp.width = dp.height = side;
  dp.num_levels = ng;
  dp.levels.resize(static_cast<std::size_t>(side) * side);
  for (auto& l : dp.levels) l = 1 + rng.below(ng);
  return dp;
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("optomx_test_" + tag + "_" + std::to_string(++counter)))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

}  // namespace testutil

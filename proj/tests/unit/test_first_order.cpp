#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "helpers.hpp"
#include "optomx/features.hpp"

using namespace optomx;
using testutil::TestRand;

namespace {

double pct(std::vector<double> v, double p) {
  // Nearest-rank style interpolation used throughout: linear between order
  // statistics at position p * (n - 1).
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

std::map<std::string, double> oracle(const std::vector<double>& v,
                                     double area, int ng) {
  const double n = static_cast<double>(v.size());
  std::map<std::string, double> f;
  double sum = 0.0, energy = 0.0;
  for (double x : v) {
    sum += x;
    energy += x * x;
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    mad += std::abs(d);
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  f["Energy"] = energy;
  f["TotalEnergy"] = energy * area;
  f["Minimum"] = *std::min_element(v.begin(), v.end());
  f["Maximum"] = *std::max_element(v.begin(), v.end());
  f["Percentile10"] = pct(v, 0.10);
  f["Percentile90"] = pct(v, 0.90);
  f["Mean"] = mean;
  f["Median"] = pct(v, 0.5);
  f["InterquartileRange"] = pct(v, 0.75) - pct(v, 0.25);
  f["Range"] = f["Maximum"] - f["Minimum"];
  f["MeanAbsoluteDeviation"] = mad / n;
  std::vector<double> mid;
  for (double x : v)
    if (x >= f["Percentile10"] && x <= f["Percentile90"]) mid.push_back(x);
  if (mid.empty()) {
    f["RobustMeanAbsoluteDeviation"] = 0.0;
  } else {
    double msum = 0.0;
    for (double x : mid) msum += x;
    const double mmean = msum / static_cast<double>(mid.size());
    double rmad = 0.0;
    for (double x : mid) rmad += std::abs(x - mmean);
    f["RobustMeanAbsoluteDeviation"] = rmad / static_cast<double>(mid.size());
  }
  f["RootMeanSquared"] = std::sqrt(energy / n);
  f["Skewness"] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  f["Kurtosis"] = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  f["Variance"] = m2;
  // Histogram features reuse the quantization level map.
  std::vector<double> hist(static_cast<std::size_t>(ng), 0.0);
  for (double x : v) {
    int level = static_cast<int>(std::floor(x * ng)) + 1;
    level = std::clamp(level, 1, ng);
    hist[static_cast<std::size_t>(level - 1)] += 1.0;
  }
  double ent = 0.0, unif = 0.0;
  for (double c : hist) {
    if (c <= 0.0) continue;
    const double p = c / n;
    ent -= p * std::log2(p);
    unif += p * p;
  }
  f["Entropy"] = ent;
  f["Uniformity"] = unif;
  return f;
}

}  // namespace

TEST_CASE("first-order names are the documented eighteen") {
  const auto& names = first_order_names();
  REQUIRE(names.size() == kFirstOrderCount);
  const std::vector<std::string> expect = {
      "Energy", "TotalEnergy", "Entropy", "Minimum", "Percentile10",
      "Percentile90", "Maximum", "Mean", "Median", "InterquartileRange",
      "Range", "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
      "RootMeanSquared", "Skewness", "Kurtosis", "Variance", "Uniformity"};
  CHECK(names == expect);
}

TEST_CASE("first-order statistics agree with direct recomputation") {
  TestRand rnd(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 16 + rnd.below(100);
    std::vector<double> v(n);
    for (auto& x : v) x = rnd.unit();
    const double area = 0.042 * 0.042;
    const int ng = 4 + static_cast<int>(rnd.below(30));
    const auto got = first_order(v, area, ng);
    const auto want = oracle(v, area, ng);
    const auto& names = first_order_names();
    REQUIRE(got.size() == names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      INFO("feature ", names[i], " trial ", trial);
      CHECK(got[i] == doctest::Approx(want.at(names[i])).epsilon(1e-12));
    }
  }
}

TEST_CASE("hand-checked values on a tiny sample") {
  // v = {0, 1, 1, 2}, area 1, ng 2.
  const std::vector<double> v = {0.0, 1.0, 1.0, 2.0};
  const auto got = first_order(v, 1.0, 2);
  const auto& names = first_order_names();
  auto at = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return got[i];
    REQUIRE(false);
    return 0.0;
  };
  CHECK(at("Energy") == 6.0);
  CHECK(at("TotalEnergy") == 6.0);
  CHECK(at("Mean") == 1.0);
  CHECK(at("Median") == 1.0);
  CHECK(at("Minimum") == 0.0);
  CHECK(at("Maximum") == 2.0);
  CHECK(at("Range") == 2.0);
  CHECK(at("Variance") == doctest::Approx(0.5));
  CHECK(at("RootMeanSquared") == doctest::Approx(std::sqrt(1.5)));
  CHECK(at("MeanAbsoluteDeviation") == doctest::Approx(0.5));
  CHECK(at("Skewness") == doctest::Approx(0.0));
  // m4 = (1 + 0 + 0 + 1)/4 = 0.5; kurtosis = 0.5/0.25 - 3 = -1.
  CHECK(at("Kurtosis") == doctest::Approx(-1.0));
  // Levels with ng=2: 0 -> 1, 1 -> 2 (floor(2)+1=3 clamps), 2 -> 2.
  // p = {1/4, 3/4}.
  CHECK(at("Uniformity") == doctest::Approx(0.0625 + 0.5625));
  CHECK(at("Entropy") ==
        doctest::Approx(-(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75))));
}

TEST_CASE("constant input yields the degenerate conventions") {
  const std::vector<double> v(25, 0.4);
  const auto got = first_order(v, 1.0, 8);
  const auto& names = first_order_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(std::isfinite(got[i]));
    if (names[i] == "Variance" || names[i] == "Skewness" ||
        names[i] == "Kurtosis" || names[i] == "Range")
      CHECK(got[i] == 0.0);
    if (names[i] == "Uniformity") CHECK(got[i] == 1.0);
    if (names[i] == "Entropy") CHECK(got[i] == 0.0);
  }
}

TEST_CASE("too-small inputs are rejected") {
  CHECK_THROWS_AS(first_order({}, 1.0, 4), Error);
  CHECK_THROWS_AS(first_order({0.5}, 1.0, 4), Error);
}

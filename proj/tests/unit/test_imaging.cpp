#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "optomx/imaging.hpp"

using namespace optomx;
using testutil::TestRand;

namespace {

LabeledSlice tiny_slice() {
  LabeledSlice s;
  s.image = GrayImage(4, 4, 0.05);
  s.labels.assign(16, kBackground);
  // background pixels average exactly 2
  for (std::size_t i = 0; i < 16; ++i) s.image[i] = 2.0;
  s.image.at(0, 0) = 1.0;
  s.image.at(0, 1) = 3.0;
  // row 1: calibration, post-subtraction values 8 and 12 -> mean 10
  s.image.at(1, 0) = 10.0;
  s.image.at(1, 1) = 14.0;
  s.labels[4] = kCalibration;
  s.labels[5] = kCalibration;
  // rows 2..3: tissue
  s.image.at(2, 0) = 2.0;   // -> 0.0 after chain
  s.image.at(2, 1) = 7.0;   // -> 0.5
  s.image.at(3, 0) = 12.0;  // -> 1.0
  s.image.at(3, 1) = 4.5;   // -> 0.25
  s.labels[8] = kNormal;
  s.labels[9] = kNormal;
  s.labels[12] = kTumor;
  s.labels[13] = kNormal;
  s.slice_id = "T1";
  s.patient_id = "P1";
  s.dose_group = 1;
  return s;
}

}  // namespace

TEST_CASE("background subtraction clamps at zero") {
  GrayImage img(2, 2);
  img.at(0, 0) = 5.0;
  img.at(0, 1) = 1.0;
  img.at(1, 0) = 2.0;
  img.at(1, 1) = 0.5;
  const GrayImage out = background_subtract(img, 2.0);
  CHECK(out.at(0, 0) == 3.0);
  CHECK(out.at(0, 1) == 0.0);
  CHECK(out.at(1, 0) == 0.0);
  CHECK(out.at(1, 1) == 0.0);
  CHECK(out.pixel_pitch_mm() == img.pixel_pitch_mm());
}

TEST_CASE("calibration divides by the target mean") {
  GrayImage img(3, 1);
  img.at(0, 0) = 4.0;
  img.at(0, 1) = 8.0;
  img.at(0, 2) = 6.0;
  const GrayImage out = calibrate(img, {0, 1});  // mean 6
  CHECK(out.at(0, 0) == doctest::Approx(4.0 / 6.0));
  CHECK(out.at(0, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(calibrate(img, {}), Error);
  GrayImage zeros(2, 2);
  CHECK_THROWS_AS(calibrate(zeros, {0, 1}), Error);
}

TEST_CASE("unit-range normalization is exact at the extremes") {
  TestRand rnd(31);
  GrayImage img(8, 8);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = rnd.range(-3.0, 9.0);
  img[5] = -3.5;
  img[40] = 9.5;
  const GrayImage out = normalize_unit_range(img);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < out.size(); ++i) {
    lo = std::min(lo, out[i]);
    hi = std::max(hi, out[i]);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
  CHECK(out[5] == 0.0);
  CHECK(out[40] == 1.0);
  GrayImage flat(3, 3, kDefaultPixelPitchMm, 4.2);
  CHECK_THROWS_AS(normalize_unit_range(flat), Error);
}

TEST_CASE("standardize runs the full chain") {
  const LabeledSlice s = tiny_slice();
  const GrayImage out = standardize(s);
  // Background mean 2 comes off first; calibration pixels then read 8 and 12
  // so the calibration mean is 10; tissue values become {0, 0.5, 1.0, 0.25}
  // and the image maximum is the calibration peak 1.2, which the final
  // rescale maps to 1.
  CHECK(out.at(2, 0) == doctest::Approx(0.0));
  CHECK(out.at(1, 1) == doctest::Approx(1.0));
  CHECK(out.at(3, 0) == doctest::Approx(1.0 / 1.2));
  CHECK(out.at(2, 1) == doctest::Approx(0.5 / 1.2));
  CHECK(out.at(3, 1) == doctest::Approx(0.25 / 1.2));
}

TEST_CASE("label masks pick the right pixels") {
  const LabeledSlice s = tiny_slice();
  CHECK(label_mask(s, kCalibration) == std::vector<std::size_t>{4, 5});
  CHECK(label_mask(s, kTumor) == std::vector<std::size_t>{12});
  CHECK(label_mask(s, kNormal) == std::vector<std::size_t>{8, 9, 13});
}

TEST_CASE("slice validation flags shape and missing tissue") {
  LabeledSlice s = tiny_slice();
  CHECK_NOTHROW(s.validate());
  s.labels.pop_back();
  CHECK_THROWS_AS(s.validate(), Error);
  LabeledSlice empty;
  empty.image = GrayImage(4, 4);
  empty.labels.assign(16, kBackground);
  CHECK_THROWS_AS(empty.validate(true), Error);
  CHECK_NOTHROW(empty.validate(false));
}

TEST_CASE("quantization maps [0,1] onto 1..Ng") {
  std::vector<double> v = {0.0, 0.249, 0.25, 0.5, 0.999, 1.0, -0.2, 1.7};
  const DiscretePatch p = quantize(v, 4, 2, 4);
  CHECK(p.num_levels == 4);
  CHECK(p.levels == std::vector<int>{1, 1, 2, 3, 4, 4, 1, 4});
  CHECK_THROWS_AS(quantize(v, 4, 2, 1), Error);

  // Against the closed form on random draws.
  TestRand rnd(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rnd.range(-0.5, 1.5);
    const DiscretePatch q = quantize(std::vector<double>{x}, 1, 1, 32);
    int expect = static_cast<int>(std::floor(x * 32.0)) + 1;
    expect = std::max(1, std::min(32, expect));
    CHECK(q.levels[0] == expect);
  }
}

TEST_CASE("crop copies the centered square") {
  GrayImage img(10, 10);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(i);
  const GrayImage c = img.crop(4, 5, 3);
  CHECK(c.width() == 3);
  CHECK(c.height() == 3);
  CHECK(c.pixel_pitch_mm() == img.pixel_pitch_mm());
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      CHECK(c.at(r, col) == img.at(3 + r, 4 + col));
  const GrayImage even = img.crop(4, 5, 4);
  CHECK(even.width() == 4);
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col)
      CHECK(even.at(r, col) == img.at(2 + r, 3 + col));
}

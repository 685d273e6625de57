#include <doctest.h>

#include <cmath>

#include "blurbench/blur_detect.hpp"
#include "blurbench/rng.hpp"
#include "test_support.hpp"

using namespace blurbench;

namespace {

// Independent oracle: explicit 3x3 kernel sweep and two-pass variance.
double variance_oracle(const Image& img) {
  const Image gray = to_grayscale(img);
  const int w = gray.width();
  const int h = gray.height();
  const int kernel[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  std::vector<double> responses;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      double r = 0.0;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          r += kernel[ky][kx] * static_cast<double>(gray.at(y + ky - 1, x + kx - 1));
        }
      }
      responses.push_back(r);
    }
  }
  double mean = 0.0;
  for (double r : responses) mean += r;
  mean /= static_cast<double>(responses.size());
  double var = 0.0;
  for (double r : responses) var += (r - mean) * (r - mean);
  return var / static_cast<double>(responses.size());
}

}  // namespace

TEST_SUITE("blur_detect") {
  TEST_CASE("constant images score zero") {
    CHECK(laplacian_variance(Image::filled(8, 8, 1, 77)).variance == 0.0);
    CHECK(laplacian_variance(Image::filled(3, 3, 3, 200)).variance == 0.0);
  }

  TEST_CASE("a 3x3 image has a single interior sample, variance 0") {
    Lcg64 rng(1);
    const Image img = testutil::random_image(3, 3, 1, rng);
    CHECK(laplacian_variance(img).variance == 0.0);
  }

  TEST_CASE("single bright interior pixel on 4x4") {
    std::vector<std::uint8_t> pixels(16, 0);
    pixels[1 * 4 + 1] = 255;
    const Image img(4, 4, 1, std::move(pixels));
    // interior responses {-1020, 255, 255, 0}: mean -127.5,
    // population variance (892.5^2 + 382.5^2 * 2 + 127.5^2) / 4
    const double expected = 276356.25;
    CHECK(laplacian_variance(img).variance == doctest::Approx(expected).epsilon(1e-12));
    CHECK(variance_oracle(img) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("matches the convolution oracle on random images") {
    Lcg64 rng(314);
    for (int trial = 0; trial < 50; ++trial) {
      const int w = 3 + static_cast<int>(rng.next_below(12));
      const int h = 3 + static_cast<int>(rng.next_below(12));
      const int ch = rng.next_below(2) == 0 ? 1 : 3;
      const Image img = testutil::random_image(w, h, ch, rng);
      CHECK(laplacian_variance(img).variance ==
            doctest::Approx(variance_oracle(img)).epsilon(1e-9));
    }
  }

  TEST_CASE("brightness offsets leave the variance unchanged") {
    Lcg64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const Image img = testutil::random_image(8, 6, 1, rng);
      std::vector<std::uint8_t> capped(img.pixels().begin(), img.pixels().end());
      for (auto& p : capped) {
        p = static_cast<std::uint8_t>(p / 2);  // room for +40 without clipping
      }
      std::vector<std::uint8_t> shifted(capped);
      for (auto& p : shifted) {
        p = static_cast<std::uint8_t>(p + 40);
      }
      const double a = laplacian_variance(Image(8, 6, 1, std::move(capped))).variance;
      const double b = laplacian_variance(Image(8, 6, 1, std::move(shifted))).variance;
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }

  TEST_CASE("scaling samples by k scales the variance by k^2") {
    Lcg64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
      const int w = 5, h = 5;
      std::vector<std::uint8_t> base(static_cast<std::size_t>(w) * h);
      for (auto& p : base) {
        p = static_cast<std::uint8_t>(rng.next_below(64));  // x3 stays in range
      }
      std::vector<std::uint8_t> tripled(base);
      for (auto& p : tripled) {
        p = static_cast<std::uint8_t>(p * 3);
      }
      const double v1 = laplacian_variance(Image(w, h, 1, std::move(base))).variance;
      const double v3 = laplacian_variance(Image(w, h, 1, std::move(tripled))).variance;
      CHECK(v3 == doctest::Approx(9.0 * v1).epsilon(1e-9));
    }
  }

  TEST_CASE("images below 3x3 are rejected") {
    try {
      laplacian_variance(Image::filled(2, 8, 1, 0));
      FAIL("expected TooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooSmall);
    }
    CHECK_THROWS_AS(laplacian_variance(Image::filled(8, 2, 1, 0)), Error);
  }

  TEST_CASE("classification boundary counts as sharp") {
    const Threshold th{60.0, {}};
    CHECK(classify({100.0, ""}, th) == Sharpness::Sharp);
    CHECK(classify({10.0, ""}, th) == Sharpness::Blurred);
    CHECK(classify({60.0, ""}, th) == Sharpness::Sharp);
  }

  TEST_CASE("calibration: separable populations") {
    const Threshold th = calibrate_threshold({100.0, 120.0}, {10.0, 20.0});
    CHECK(th.cutoff == doctest::Approx(60.0));
    CHECK(th.calibration.misclassified == 0);
    CHECK_FALSE(th.calibration.warning);
    CHECK(th.calibration.sharp_samples == 2);
    CHECK(th.calibration.blurred_samples == 2);
  }

  TEST_CASE("calibration: degenerate and inverted populations") {
    const Threshold equal = calibrate_threshold({50.0}, {50.0});
    CHECK(equal.cutoff == doctest::Approx(50.0));
    CHECK(equal.calibration.misclassified == 1);
    CHECK(equal.calibration.warning);

    const Threshold inverted = calibrate_threshold({5.0}, {100.0});
    CHECK(inverted.cutoff == doctest::Approx(52.5));
    CHECK(inverted.calibration.misclassified == 2);
    CHECK(inverted.calibration.warning);
  }

  TEST_CASE("calibration achieves zero error whenever populations separate") {
    Lcg64 rng(88);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> blurred, sharp;
      const std::size_t nb = 1 + rng.next_below(20);
      const std::size_t ns = 1 + rng.next_below(20);
      for (std::size_t i = 0; i < nb; ++i) {
        blurred.push_back(static_cast<double>(rng.next_below(1000)) / 10.0);
      }
      for (std::size_t i = 0; i < ns; ++i) {
        sharp.push_back(101.0 + static_cast<double>(rng.next_below(1000)) / 10.0);
      }
      const Threshold th = calibrate_threshold(sharp, blurred);
      CHECK(th.calibration.misclassified == 0);
      for (double s : sharp) {
        CHECK(classify({s, ""}, th) == Sharpness::Sharp);
      }
      for (double b : blurred) {
        CHECK(classify({b, ""}, th) == Sharpness::Blurred);
      }
    }
  }

  TEST_CASE("calibration rejects empty inputs") {
    try {
      calibrate_threshold({}, {1.0});
      FAIL("expected BadCalibration");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BadCalibration);
    }
    CHECK_THROWS_AS(calibrate_threshold({1.0}, {}), Error);
  }

  TEST_CASE("threshold file round trip") {
    testutil::TempDir dir;
    const Threshold th = calibrate_threshold({100.0, 120.0}, {10.0, 20.0});
    const auto file = dir.path / "threshold.json";
    save_threshold(th, file);
    const Threshold loaded = load_threshold(file);
    CHECK(loaded.cutoff == th.cutoff);
    CHECK(loaded.calibration.sharp_samples == th.calibration.sharp_samples);
    CHECK(loaded.calibration.blurred_samples == th.calibration.blurred_samples);
    CHECK(loaded.calibration.misclassified == th.calibration.misclassified);
    CHECK(loaded.calibration.warning == th.calibration.warning);

    CHECK_THROWS_AS(load_threshold(dir.path / "nope.json"), Error);
  }
}

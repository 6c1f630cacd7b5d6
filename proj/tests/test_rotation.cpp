#include <doctest.h>

#include <cmath>

#include "ctpack/error.hpp"
#include "ctpack/segmentation.hpp"
#include "support.hpp"

using namespace ctpack;

TEST_SUITE("rotation") {
  TEST_CASE("objective peaks at the aligned orientation") {
    const auto mask = test::grid_mask(225, 3, 4, 0.0);
    const double j0 = rotation_objective(mask, 0.0);
    for (double a : {-8.0, -3.0, -1.0, 1.0, 2.0, 6.0}) {
      CAPTURE(a);
      CHECK(rotation_objective(mask, a) < j0);
    }
  }

  TEST_CASE("objective is invariant to 180 degrees and to scaling the mask") {
    const auto mask = test::grid_mask(225, 3, 4, 2.0);
    Image2D<double> scaled = mask;
    for (double& v : scaled.pixels()) v *= 7.5;
    CHECK(rotation_objective(mask, 1.3) == doctest::Approx(rotation_objective(mask, 181.3)).epsilon(1e-6));
    CHECK(rotation_objective(scaled, -2.0) == doctest::Approx(rotation_objective(mask, -2.0)).epsilon(1e-9));
  }

  TEST_CASE("auto_rotate recovers the grid twist") {
    for (double theta : {-8.0, -4.0, -1.9, 0.0, 2.5, 7.0}) {
      CAPTURE(theta);
      const RotationSweep sweep = auto_rotate(test::grid_mask(225, 3, 4, theta));
      CHECK(std::abs(sweep.angle_deg + theta) <= 0.2);
      CHECK(sweep.angles.size() == 201);
      CHECK(sweep.objective.size() == sweep.smoothed.size());
    }
  }

  TEST_CASE("degenerate input") {
    try {
      (void)auto_rotate(Image2D<double>(50, 50));
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DegenerateMask);
    }
    RotationOptions literal;
    literal.presmooth_sigma = 0.0;  // blurring would darken the borders
    try {
      (void)auto_rotate(Image2D<double>(50, 50, 1.0), literal);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FlatObjective);
    }
    RotationOptions bad;
    bad.step_deg = 0.0;
    CHECK_THROWS_AS((void)auto_rotate(test::grid_mask(64, 2, 2, 0.0), bad), Error);
  }

  TEST_CASE("gaussian_blur conserves interior mass and is symmetric") {
    Image2D<double> img(41, 41);
    img(20, 20) = 1.0;
    const auto out = gaussian_blur(img, 2.0);
    double total = 0.0;
    for (double v : out.pixels()) total += v;
    CHECK(total == doctest::Approx(1.0));
    CHECK(out(18, 20) == doctest::Approx(out(22, 20)));
    CHECK(out(20, 17) == doctest::Approx(out(17, 20)));
    CHECK(out(20, 20) > out(21, 20));
    // 1-D kernel value at offset 0 squared, for sigma 2 truncated at 6
    double norm = 0.0;
    for (int i = -6; i <= 6; ++i) norm += std::exp(-0.5 * i * i / 4.0);
    CHECK(out(20, 20) == doctest::Approx(1.0 / (norm * norm)));
    CHECK(gaussian_blur(img, 0.0) == img);
  }
}

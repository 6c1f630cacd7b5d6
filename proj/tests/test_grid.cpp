#include <doctest.h>

#include <cmath>

#include "ctpack/error.hpp"
#include "ctpack/segmentation.hpp"
#include "support.hpp"

using namespace ctpack;

namespace {

// Continuous coordinate of wall k when drawn by test::grid_mask.
double wall(std::size_t k, std::size_t n, std::size_t size = 225, double margin = 20.0) {
  const double lo = margin, hi = static_cast<double>(size) - 1.0 - margin;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n) + 0.5;
}

Image2D<double> lines(std::size_t w, std::size_t h, const std::vector<std::size_t>& ys,
                      const std::vector<std::size_t>& xs) {
  Image2D<double> img(w, h);
  for (std::size_t y : ys)
    for (std::size_t x = 0; x < w; ++x) img(x, y) = 1.0;
  for (std::size_t x : xs)
    for (std::size_t y = 0; y < h; ++y) img(x, y) = 1.0;
  return img;
}

Errc code_of(const Image2D<double>& img, std::size_t r, std::size_t c, const GridOverride& o = {}) {
  try {
    (void)grid_segment(img, r, c, 0.0, o);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("3x4 grid with walls: n+1 cuts on each axis within one pixel") {
    const GridCuts cuts = grid_segment(test::grid_mask(225, 3, 4, 0.0), 3, 4, 1.5);
    CHECK(cuts.row_mode == CutMode::Walls);
    CHECK(cuts.col_mode == CutMode::Walls);
    CHECK(cuts.rotation_deg == 1.5);
    REQUIRE(cuts.row_cuts.size() == 4);
    REQUIRE(cuts.col_cuts.size() == 5);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(cuts.row_cuts[k] - wall(k, 3)) <= 1.0);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(cuts.col_cuts[k] - wall(k, 4)) <= 1.0);
  }

  TEST_CASE("rotated then corrected grid still splits correctly") {
    const auto mask = test::grid_mask(225, 3, 4, 4.0);
    const RotationSweep sweep = auto_rotate(mask);
    const GridCuts cuts = grid_segment(rotate_image(mask, sweep.angle_deg), 3, 4, sweep.angle_deg);
    REQUIRE(cuts.row_cuts.size() == 4);
    REQUIRE(cuts.col_cuts.size() == 5);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(cuts.row_cuts[k] - wall(k, 3)) <= 1.5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(cuts.col_cuts[k] - wall(k, 4)) <= 1.5);
  }

  TEST_CASE("1x1 tier uses its two walls") {
    const GridCuts cuts = grid_segment(test::grid_mask(100, 1, 1, 0.0), 1, 1);
    REQUIRE(cuts.row_cuts.size() == 2);
    CHECK(cuts.row_cuts[0] == doctest::Approx(wall(0, 1, 100)));
    CHECK(cuts.row_cuts[1] == doctest::Approx(wall(1, 1, 100)));
  }

  TEST_CASE("interior mode when the walls are missing") {
    const GridCuts cuts = grid_segment(lines(120, 90, {30, 60}, {40}), 3, 2);
    CHECK(cuts.row_mode == CutMode::Interior);
    CHECK(cuts.col_mode == CutMode::Interior);
    CHECK(cuts.row_cuts == std::vector<double>{0.0, 30.5, 60.5, 90.0});
    CHECK(cuts.col_cuts == std::vector<double>{0.0, 40.5, 120.0});
  }

  TEST_CASE("most prominent n+1 peaks win") {
    Image2D<double> img = lines(100, 100, {10, 50, 90}, {10, 90});
    for (std::size_t x = 0; x < 30; ++x) img(x, 70) = 1.0;  // faint partial line
    const GridCuts cuts = grid_segment(img, 2, 1);
    CHECK(cuts.row_cuts == std::vector<double>{10.5, 50.5, 90.5});
    CHECK(cuts.row_candidates.size() == 4);
  }

  TEST_CASE("wrong peak count and overrides") {
    const auto img = lines(100, 100, {30, 60}, {20, 50, 80});
    CHECK(code_of(img, 4, 2) == Errc::PeakCountMismatch);
    CHECK(code_of(img, 3, 3) == Errc::PeakCountMismatch);  // columns: 3 peaks fit neither 4 nor 2

    GridOverride o;
    o.col_cuts = std::vector<double>{0.0, 50.0, 100.0};
    const GridCuts cuts = grid_segment(img, 3, 2, 0.0, o);
    CHECK(cuts.col_mode == CutMode::Ratified);
    CHECK(cuts.col_cuts == *o.col_cuts);
    CHECK(cuts.col_candidates.size() == 3);
    CHECK(cuts.row_mode == CutMode::Interior);

    GridOverride short_cuts;
    short_cuts.col_cuts = std::vector<double>{0.0, 100.0};
    CHECK(code_of(img, 3, 2, short_cuts) == Errc::InvalidArgument);
    GridOverride unordered;
    unordered.col_cuts = std::vector<double>{0.0, 60.0, 50.0};
    CHECK(code_of(img, 3, 2, unordered) == Errc::InvalidArgument);
    GridOverride outside;
    outside.col_cuts = std::vector<double>{0.0, 50.0, 101.0};
    CHECK(code_of(img, 3, 2, outside) == Errc::InvalidArgument);
    CHECK(code_of(img, 0, 2) == Errc::InvalidArgument);
  }

  TEST_CASE("cut mode names") {
    for (CutMode m : {CutMode::Walls, CutMode::Interior, CutMode::Ratified}) CHECK(cut_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS((void)cut_mode_from_string("diagonal"), Error);
  }
}

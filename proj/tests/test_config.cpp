#include <doctest.h>

#include <cmath>
#include <fstream>

#include "ctpack/config.hpp"
#include "ctpack/error.hpp"
#include "support.hpp"

using namespace ctpack;

namespace {

Errc config_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for: " << text);
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("TOML subset") {
    const auto j = parse_toml(
        "# scan config\n"
        "name = \"a # not a comment\"  # trailing\n"
        "n = 1_000\n"
        "x = -2.5e1\n"
        "on = true\n"
        "big = inf\n"
        "list = [1, 2.5, \"s,t\"]\n"
        "empty = []\n"
        "[t]\n"
        "k = 1\n"
        "[t.sub]\n"
        "dotted.key = false\n");
    CHECK(j.at("name") == "a # not a comment");
    CHECK(j.at("n") == 1000);
    CHECK(j.at("x").get<double>() == -25.0);
    CHECK(j.at("on") == true);
    CHECK(std::isinf(j.at("big").get<double>()));
    CHECK(j.at("list").size() == 3);
    CHECK(j.at("list")[2] == "s,t");
    CHECK(j.at("empty").empty());
    CHECK(j.at("t").at("k") == 1);
    CHECK(j.at("t").at("sub").at("dotted").at("key") == false);
  }

  TEST_CASE("TOML errors carry the line") {
    for (const char* bad : {"x = \n", "x = \"open\n", "[t\n", "just words\n", "x = 1\nx = 2\n", "x = [1, 2\n", "x = 1z\n"}) {
      CAPTURE(bad);
      try {
        (void)parse_toml(bad);
        FAIL("no error");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseError);
        CHECK(e.message().find("line") != std::string::npos);
      }
    }
  }

  TEST_CASE("full scan config") {
    const ScanConfig c = parse_config(
        "alignment = [3.5, 10, 500, 12, 510]\n"
        "isolevel = 21000\n"
        "pad = 2\n"
        "voxel_pitch_um = 42.5\n"
        "[thresholds]\n"
        "a_divider = 8000\n"
        "b_divider = 19000\n"
        "a_object = 19500\n"
        "[overrides]\n"
        "tier_cuts = [26, 51]\n"
        "[overrides.grid.2]\n"
        "row_cuts = [12.5, 80, 147, 214]\n");
    REQUIRE(c.alignment);
    CHECK(c.alignment->angle_deg == 3.5);
    CHECK(c.alignment->rows == PixelRange{10, 500});
    CHECK(c.alignment->cols == PixelRange{12, 510});
    REQUIRE(c.thresholds);
    CHECK(c.thresholds->a_object == 19500);
    CHECK(std::isinf(c.thresholds->b_object));
    CHECK(c.isolevel == 21000.0);
    CHECK(c.pad == 2.0);
    CHECK(c.voxel_pitch_um == 42.5);
    CHECK(c.tier_cuts == std::vector<std::size_t>{26, 51});
    REQUIRE(c.grid_cuts.count(2) == 1);
    CHECK(c.grid_cuts.at(2).row_cuts == std::vector<double>{12.5, 80, 147, 214});
    CHECK_FALSE(c.grid_cuts.at(2).col_cuts);
  }

  TEST_CASE("defaults stay unset and a_object defaults to b_divider") {
    const ScanConfig c = parse_config("[thresholds]\na_divider = 1\nb_divider = 2\n");
    CHECK_FALSE(c.alignment);
    CHECK_FALSE(c.isolevel);
    CHECK_FALSE(c.tier_cuts);
    CHECK(c.thresholds->a_object == 2.0);
  }

  TEST_CASE("alignment file is resolved next to the config") {
    test::TempDir dir("cfg");
    save_alignment(dir / "align.txt", AlignmentParams{-1.25, {5, 95}, {6, 96}});
    {
      std::ofstream out(dir / "scan.toml");
      out << "alignment = \"align.txt\"\n";
    }
    const ScanConfig c = load_config(dir / "scan.toml");
    REQUIRE(c.alignment);
    CHECK(c.alignment->angle_deg == -1.25);
    CHECK(c.alignment->cols == PixelRange{6, 96});
    try {
      (void)load_config(dir / "none.toml");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::IoError);
    }
  }

  TEST_CASE("semantic errors") {
    CHECK(config_error("alignment = [1, 2, 3]\n") == Errc::ParseError);
    CHECK(config_error("alignment = true\n") == Errc::ParseError);
    CHECK(config_error("isolevel = \"high\"\n") == Errc::ParseError);
    CHECK(config_error("[thresholds]\na_divider = 1\n") == Errc::ParseError);
    CHECK(config_error("[thresholds]\na_divider = 5\nb_divider = 2\n") == Errc::InvalidArgument);
    CHECK(config_error("[overrides]\ntier_cuts = [1.5]\n") == Errc::ParseError);
    CHECK(config_error("[overrides.grid.x]\nrow_cuts = [1, 2]\n") == Errc::ParseError);
  }
}

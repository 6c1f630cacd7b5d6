#include <doctest.h>

#include <fstream>

#include "ctpack/error.hpp"
#include "ctpack/layout.hpp"
#include "support.hpp"

using namespace ctpack;

namespace {

Errc code_of(const std::string& csv) {
  try {
    (void)parse_layout(csv);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for: " << csv);
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("layout") {
  TEST_CASE("parses a two-tier layout with blanks and EMPTY tokens") {
    const std::string csv =
        "scan_id,tier,row,c1,c2,c3\n"
        "SC7,1,1,A1,,A2\n"
        "SC7,1,2,A3,A4,empty\n"
        "SC7,2,1,B1,B2,B3\n"
        "SC7,2,2,EMPTY,B4,\n";
    const ScanLayout layout = parse_layout(csv);
    CHECK(layout.scan_id == "SC7");
    REQUIRE(layout.tier_count() == 2);
    CHECK(layout.tiers[0].n_rows() == 2);
    CHECK(layout.tiers[0].n_cols() == 3);
    CHECK(layout.total_cells() == 12);
    CHECK(layout.occupied_count() == 8);
    CHECK(layout.lookup(1, 1, 2).is_empty());
    CHECK(layout.lookup(1, 2, 2).id() == "A4");
    CHECK(layout.lookup(2, 2, 1).is_empty());
    CHECK(layout.identifiers() == std::vector<std::string>{"A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"});
  }

  TEST_CASE("rows may appear in any order, CRLF and BOM are accepted") {
    const std::string csv = "\xEF\xBB\xBFS,1,2,c,d\r\nS,1,1,a,b\r\n";
    const ScanLayout layout = parse_layout(csv);
    CHECK(layout.lookup(1, 1, 1).id() == "a");
    CHECK(layout.lookup(1, 2, 2).id() == "d");
  }

  TEST_CASE("quoted fields keep commas") {
    const ScanLayout layout = parse_layout("S,1,1,\"x,1\",y\n");
    CHECK(layout.lookup(1, 1, 1).id() == "x,1");
  }

  TEST_CASE("round trip through serialize_layout") {
    const std::string csv = "S,1,1,a,,b\nS,1,2,c,d,e\nS,2,1,f,,\n";
    const ScanLayout layout = parse_layout(csv);
    CHECK(serialize_layout(layout) == csv);
    CHECK(parse_layout(serialize_layout(layout)) == layout);
  }

  TEST_CASE("errors") {
    CHECK(code_of("S,1,1,a,b\nS,1,2,a,c\n") == Errc::DuplicateIdentifier);
    CHECK(code_of("S,1,1,a,b\nS,1,2,c\n") == Errc::RaggedTier);
    CHECK(code_of("S,1,1,a,b\nS,3,1,c,d\n") == Errc::NonConsecutiveTiers);
    CHECK(code_of("S,2,1,a,b\n") == Errc::NonConsecutiveTiers);
    CHECK(code_of("\n\n") == Errc::EmptyLayout);
    CHECK(code_of("S,1,1,a/b\n") == Errc::ParseError);
    CHECK(code_of("S,1,1,a\nT,1,2,b\n") == Errc::ParseError);
    CHECK(code_of("S,1,1,a\nS,1,3,b\n") == Errc::ParseError);
    CHECK(code_of("S,1,1\n") == Errc::ParseError);
  }

  TEST_CASE("lookup outside the grid") {
    const ScanLayout layout = parse_layout("S,1,1,a,b\n");
    CHECK_THROWS_AS((void)layout.lookup(1, 2, 1), Error);
    CHECK_THROWS_AS((void)layout.lookup(2, 1, 1), Error);
    try {
      (void)layout.lookup(1, 1, 3);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::OutOfBounds);
    }
  }

  TEST_CASE("load_layout reads files and reports missing ones") {
    test::TempDir dir("layout");
    {
      std::ofstream out(dir / "l.csv");
      out << "S,1,1,a,b\n";
    }
    CHECK(load_layout((dir / "l.csv").string()).occupied_count() == 2);
    try {
      (void)load_layout((dir / "missing.csv").string());
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::IoError);
    }
  }

  TEST_CASE("asymmetry: symmetric patterns are flagged") {
    // 3x4 with empties at (1,1) and (3,4): invariant under 180-degree rotation.
    const ScanLayout rot = parse_layout("S,1,1,,a,b,c\nS,1,2,d,e,f,g\nS,1,3,h,i,j,\n");
    const SymmetryReport r = validate_asymmetry(rot);
    REQUIRE(r.tiers.size() == 1);
    CHECK(r.tiers[0].rotation_180);
    CHECK_FALSE(r.tiers[0].mirror_horizontal);
    CHECK_FALSE(r.tiers[0].mirror_vertical);
    CHECK(r.warnings().size() == 1);

    // empties at (1,1) and (1,4): left-right mirror symmetric.
    const ScanLayout mirror = parse_layout("S,1,1,,a,b,\nS,1,2,d,e,f,g\nS,1,3,h,i,j,k\n");
    CHECK(validate_asymmetry(mirror).tiers[0].mirror_horizontal);
    CHECK_FALSE(validate_asymmetry(mirror).tiers[0].rotation_180);
  }

  TEST_CASE("asymmetry: an asymmetric tier passes, too few empties warn") {
    const ScanLayout ok = parse_layout("S,1,1,,,a,b\nS,1,2,c,d,e,f\nS,1,3,g,h,i,j\n");
    const SymmetryReport r = validate_asymmetry(ok);
    CHECK_FALSE(r.tiers[0].symmetric());
    CHECK(r.tiers[0].empty_cells == 2);
    CHECK(r.warnings().empty());

    const ScanLayout one = parse_layout("S,1,1,,a,b,c\nS,1,2,c2,d,e,f\nS,1,3,g,h,i,j\n");
    const auto w = validate_asymmetry(one).warnings();
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("fewer than 2") != std::string::npos);
  }

  TEST_CASE("asymmetry depends on occupancy only") {
    const ScanLayout a = parse_layout("S,1,1,,,a,b\nS,1,2,c,d,e,f\n");
    const ScanLayout b = parse_layout("T,1,1,,,w,x\nT,1,2,y,z,u,v\n");
    const auto ra = validate_asymmetry(a).tiers[0];
    const auto rb = validate_asymmetry(b).tiers[0];
    CHECK(ra.rotation_180 == rb.rotation_180);
    CHECK(ra.mirror_horizontal == rb.mirror_horizontal);
    CHECK(ra.mirror_vertical == rb.mirror_vertical);
  }
}

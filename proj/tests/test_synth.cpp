#include <doctest.h>

#include <fstream>
#include <iterator>

#include "ctpack/error.hpp"
#include "ctpack/slice_io.hpp"
#include "ctpack/slice_stack.hpp"
#include "ctpack/synth.hpp"
#include "support.hpp"

using namespace ctpack;

namespace {

SceneSpec tiny_scene() {
  SceneSpec spec;
  spec.width = 96;
  spec.height = 96;
  spec.depth = 64;
  spec.package_size = 70;
  spec.margin_bottom = 4;
  spec.margin_top = 4;
  spec.global_rotation_deg = 2.0;
  spec.semi_x = {6, 8};
  spec.semi_y = {6, 8};
  spec.semi_z = {5, 6};
  SynthTierSpec a;
  a.rows = 2;
  a.cols = 2;
  a.empties = {{1, 1}};
  a.twist_deg = 3.0;
  SynthTierSpec b = a;
  b.empties = {};
  b.twist_deg = -2.0;
  spec.tiers = {a, b};
  spec.offset = 1000;
  spec.seed = 7;
  return spec;
}

std::string bytes_of(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Errc invalid_code(const SceneSpec& spec) {
  try {
    spec.validate();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("generation is deterministic across worker counts") {
    test::TempDir dir("synth");
    SceneSpec spec = tiny_scene();
    spec.workers = 1;
    const SynthOutput one = generate(spec, dir / "one");
    spec.workers = 3;
    const SynthOutput three = generate(spec, dir / "three");

    const SliceStack stack = SliceStack::open(one.slice_dir);
    REQUIRE(stack.depth() == spec.depth);
    CHECK(stack.width() == 96);
    REQUIRE(stack.voxel_pitch_um().has_value());
    CHECK(*stack.voxel_pitch_um() == 50.0);
    for (std::size_t i = 0; i < stack.files().size(); ++i) {
      CAPTURE(i);
      CHECK(bytes_of(stack.files()[i]) == bytes_of(three.slice_dir / stack.files()[i].filename()));
    }
    CHECK(bytes_of(one.truth_json) == bytes_of(three.truth_json));
    CHECK(bytes_of(one.layout_csv) == bytes_of(three.layout_csv));
    CHECK(read_slice_file(stack.files()[30]) == render_slice(spec, 30));

    const ScanLayout layout = load_layout(one.layout_csv);
    CHECK(layout.tier_count() == 2);
    CHECK(layout.occupied_count() == 7);
    CHECK(one.truth.objects.size() == 7);
    CHECK(one.truth.gap_centers.size() == 1);
  }

  TEST_CASE("different seeds give different scans") {
    SceneSpec a = tiny_scene();
    SceneSpec b = a;
    b.seed = 8;
    CHECK_FALSE(render_slice(a, 20) == render_slice(b, 20));
  }

  TEST_CASE("truth objects sit inside their cells and round trip through JSON") {
    test::TempDir dir("truth");
    const SynthOutput out = generate(tiny_scene(), dir.path());
    const GroundTruth back = GroundTruth::load(out.truth_json);
    CHECK(back.to_json() == out.truth.to_json());
    for (const TruthObject& o : out.truth.objects) {
      CAPTURE(o.id);
      CHECK(o.voxel_count > 0);
      CHECK(out.truth.cell_contains(o.id, {o.centroid[0], o.centroid[1], o.centroid[2]}));
      const TruthTier& t = out.truth.tiers[static_cast<std::size_t>(o.tier - 1)];
      CHECK(o.extent.z0 >= t.z_start);
      CHECK(o.extent.z1 <= t.z_stop);
    }
    CHECK_THROWS_AS((void)out.truth.object("nope"), Error);
    // round trip between scan and tier frames
    const Point2 p = out.truth.to_tier_frame(1, {40.0, 50.0});
    CHECK(std::hypot(p.x - 47.5, p.y - 47.5) == doctest::Approx(std::hypot(40.0 - 47.5, 50.0 - 47.5)));
  }

  TEST_CASE("scene validation") {
    CHECK_NOTHROW(default_scene(3).validate());
    CHECK_NOTHROW(small_scene(4, 2).validate());
    SceneSpec s = tiny_scene();
    s.tiers.clear();
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.divider.mean = 4500;
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.offset = 40000;
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.tiers[0].empties = {{3, 1}};
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.tiers[1].twist_deg = 12;
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.semi_x = {20, 30};
    CHECK(invalid_code(s) == Errc::SpecInvalid);
    s = tiny_scene();
    s.format = "bmp";
    CHECK(invalid_code(s) == Errc::SpecInvalid);
  }

  TEST_CASE("default scene parameters") {
    const SceneSpec d = default_scene(1);
    CHECK(d.width == 600);
    CHECK(d.depth == 800);
    REQUIRE(d.tiers.size() == 3);
    for (const auto& t : d.tiers) {
      CHECK(t.rows == 3);
      CHECK(t.cols == 4);
      CHECK(t.empties.size() == 2);
      CHECK(std::abs(t.twist_deg) <= 8.0);
    }
    CHECK(d.offset >= 0.0);
    CHECK(d.offset <= 20000.0);
    CHECK(validate_asymmetry(scene_layout(d)).warnings().empty());
  }

  TEST_CASE("score_boxes") {
    test::TempDir dir("score");
    const SynthOutput out = generate(tiny_scene(), dir.path());
    std::vector<ObjectBox> boxes;
    for (const TruthObject& o : out.truth.objects) {
      ObjectBox b;
      b.id = o.id;
      b.box = o.extent;
      boxes.push_back(b);
    }
    ScoreReport r = score_boxes(out.truth, boxes);
    CHECK(r.perfect());
    CHECK(r.recall == 1.0);
    for (const auto& s : r.objects) {
      CHECK(s.centroid_in_cell);
      CHECK(s.volume_ratio == doctest::Approx(1.0));
    }

    boxes[0].box.x1 -= 1;
    boxes.pop_back();
    r = score_boxes(out.truth, boxes);
    CHECK(r.contained == out.truth.objects.size() - 2);
    CHECK_FALSE(r.objects.front().contained);
    CHECK_FALSE(r.objects.back().contained);
    CHECK(r.to_json().at("contained") == r.contained);

    ObjectBox stray;
    stray.id = "ghost";
    boxes.push_back(stray);
    try {
      (void)score_boxes(out.truth, boxes);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnknownIdentifier);
    }
  }
}

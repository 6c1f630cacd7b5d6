#include <doctest.h>

#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"
#include "ctpack/server.hpp"
#include "ctpack/session.hpp"
#include "scene_fixture.hpp"

using namespace ctpack;

namespace {

Errc run_error(Session& s, Step through = Step::Surface) {
  try {
    (void)s.run(through);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

// Every sidecar, decision and derived JSON under meta/, by relative path.
std::map<std::string, std::string> meta_files(const Session& s) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(s.meta_dir()))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), s.meta_dir()).string()] = test::file_bytes(e.path());
  return out;
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("steps without decisions raise MissingDecision") {
    const auto& scan = test::small_scan();
    test::TempDir out("sess");
    Session s(scan.options(out.path()));
    CHECK(s.step_state(Step::Align) == "pending");
    CHECK(run_error(s) == Errc::MissingDecision);
    CHECK_FALSE(std::filesystem::exists(s.sidecar(Step::Align)));

    try {
      s.run_step(Step::Subsample);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InvalidArgument);
    }

    s.set_alignment(scan.out.truth.alignment);
    CHECK(s.step_state(Step::Align) == "ratified");
    CHECK(run_error(s) == Errc::MissingDecision);  // thresholds
    CHECK(s.is_done(Step::Subsample));
    CHECK_FALSE(s.is_done(Step::Thresholds));
  }

  TEST_CASE("decision validation") {
    const auto& scan = test::small_scan();
    test::TempDir out("sess");
    Session s(scan.options(out.path()));
    CHECK_THROWS_AS(s.set_alignment({0.0, {0, 999}, {0, 10}}), Error);
    CHECK_THROWS_AS(s.set_thresholds({5, 1, 6}), Error);
    CHECK_THROWS_AS(s.set_tier_cuts(std::vector<std::size_t>{1, 2, 3}), Error);
    CHECK_THROWS_AS(s.set_grid_cuts(9, GridOverride{}), Error);
    CHECK_THROWS_AS(s.set_pad(-1.0), Error);
    CHECK_THROWS_AS(s.set_voxel_pitch(0.0), Error);
    CHECK(step_from_string("grid") == Step::Grid);
    CHECK_THROWS_AS((void)step_from_string("mesh"), Error);
    CHECK(all_steps().size() == kStepCount);
  }

  TEST_CASE("full run, idempotence, invalidation and decision-source equivalence") {
    const auto& scan = test::small_scan();
    test::TempDir out("sess");

    Session a(scan.options(out / "config"));
    a.apply_config(parse_config(scan.config_text()));
    const SessionReport report = a.run();
    CHECK(report.steps.size() == kStepCount);
    CHECK(report.failures.empty());
    CHECK(report.objects_processed == scan.out.truth.objects.size());
    CHECK(std::filesystem::exists(out / "config" / "report.json"));
    for (Step st : all_steps()) CHECK(a.step_state(st) == "done");

    // boxes contain their objects
    const ScoreReport score = score_boxes(scan.out.truth, a.boxes());
    CHECK(score.perfect());
    for (const TruthObject& o : scan.out.truth.objects)
      CHECK(std::filesystem::exists(a.mesh_dir() / mesh_filename(o.id, a.isolevel())));
    CHECK(a.isolevel() == scan.out.truth.thresholds.b_divider);

    // idempotent: nothing re-runs and nothing changes
    const auto before = meta_files(a);
    CHECK(a.run().steps.empty());
    a.apply_config(parse_config(scan.config_text()));
    CHECK(a.is_done(Step::Surface));
    CHECK(meta_files(a) == before);

    // the same decisions through the session API
    Session b(scan.options(out / "api"));
    SessionApi api(b);
    const auto& al = scan.out.truth.alignment;
    const auto& th = scan.out.truth.thresholds;
    CHECK(api.post("/api/alignment", {{"angle_deg", al.angle_deg},
                                      {"row_range", {al.rows.start, al.rows.stop}},
                                      {"col_range", {al.cols.start, al.cols.stop}}})
              .status == 200);
    CHECK(api.post("/api/thresholds", {{"a_divider", th.a_divider}, {"b_divider", th.b_divider}, {"a_object", th.a_object}})
              .status == 200);
    CHECK(api.post("/api/parameters", {{"pad", 3}}).status == 200);
    const ApiResponse run = api.post("/api/run", {{"through", "surface"}});
    REQUIRE(run.status == 200);
    CHECK(meta_files(b) == before);

    // invalidation
    a.set_isolevel(th.b_divider + 500.0);
    CHECK(a.is_done(Step::Extract));
    CHECK_FALSE(a.is_done(Step::Surface));
    CHECK_FALSE(std::filesystem::exists(a.mesh_dir()));
    a.set_pad(2.0);
    CHECK(a.is_done(Step::Tiers));
    CHECK_FALSE(a.is_done(Step::Grid));
    CHECK_FALSE(std::filesystem::exists(a.store_dir()));
    a.set_thresholds({th.a_divider, th.b_divider + 1.0, th.a_object + 1.0});
    CHECK(a.is_done(Step::Subsample));
    CHECK_FALSE(a.is_done(Step::Thresholds));
    a.set_alignment(al);  // unchanged: keeps the subsampled volume
    CHECK(a.is_done(Step::Subsample));
    a.invalidate_from(Step::Subsample);
    CHECK(a.is_done(Step::Align));
    CHECK_FALSE(std::filesystem::exists(a.meta_dir() / "subsampled.raw"));
  }

  TEST_CASE("tier and grid overrides are ratified") {
    const auto& scan = test::small_scan();
    test::TempDir out("sess");
    Session s(scan.options(out.path()));
    s.apply_config(parse_config(scan.config_text()));
    s.run(Step::Tiers);
    const auto detected = read_json_file(s.sidecar(Step::Tiers)).at("cuts").get<std::vector<std::size_t>>();
    REQUIRE(detected.size() == 1);

    s.set_tier_cuts(std::vector<std::size_t>{detected[0] + 1});
    CHECK(s.step_state(Step::Tiers) == "ratified");
    s.run(Step::Tiers);
    const auto tiers = read_json_file(s.sidecar(Step::Tiers));
    CHECK(tiers.at("ratified") == true);
    CHECK(tiers.at("cuts")[0] == detected[0] + 1);
    CHECK(tiers.at("detected_cuts")[0] == detected[0]);

    s.run(Step::Grid);
    const auto grid = read_json_file(s.sidecar(Step::Grid));
    const auto cols = grid.at("tiers")[0].at("cuts").at("col_cuts").get<std::vector<double>>();
    GridOverride g;
    g.col_cuts = cols;
    g.col_cuts->front() += 1.0;
    s.set_grid_cuts(1, g);
    CHECK_FALSE(s.is_done(Step::Grid));
    CHECK(s.grid_overrides().at(1).col_cuts == g.col_cuts);
    s.run(Step::Grid);
    const auto regrid = read_json_file(s.sidecar(Step::Grid));
    CHECK(regrid.at("tiers")[0].at("ratified") == true);
    CHECK(regrid.at("tiers")[0].at("cuts").at("col_cuts")[0].get<double>() == g.col_cuts->front());
    CHECK(regrid.at("tiers")[0].at("cuts").at("col_mode") == "ratified");

    s.set_grid_cuts(1, std::nullopt);
    s.set_tier_cuts(std::nullopt);
    CHECK(s.grid_overrides().empty());
    CHECK_FALSE(s.tier_cut_override());
    CHECK(s.step_state(Step::Tiers) == "pending");
  }
}

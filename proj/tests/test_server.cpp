#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <numeric>
#include <thread>

#include "ctpack/error.hpp"
#include "ctpack/server.hpp"
#include "scene_fixture.hpp"

using namespace ctpack;

TEST_SUITE("server") {
  TEST_CASE("session API endpoints") {
    const auto& scan = test::small_scan();
    test::TempDir out("api");
    Session session(scan.options(out.path()));
    SessionApi api(session);
    const auto& al = scan.out.truth.alignment;
    const auto& th = scan.out.truth.thresholds;

    ApiResponse r = api.get("/api/session");
    CHECK(r.status == 200);
    CHECK(r.body.at("steps").size() == kStepCount);
    CHECK(r.body.at("layout").at("tiers").size() == 2);
    CHECK(r.body.at("decisions").empty());

    CHECK(api.get("/api/nothing").status == 404);
    CHECK(api.post("/api/nothing", nlohmann::json::object()).status == 404);
    CHECK(api.get("/api/histogram").status == 400);  // subsample not run
    r = api.post("/api/run", {{"through", "surface"}});
    CHECK(r.status == 409);
    CHECK(r.body.at("error") == "MissingDecision");

    // raw preview before any alignment
    r = api.get("/api/slice", {{"k", "10"}, {"raw", "1"}});
    REQUIRE(r.status == 200);
    CHECK(r.body.at("width") == 240);
    CHECK(r.body.at("pixels").size() == 240 * 240);
    CHECK(api.get("/api/slice", {{"k", "x"}}).status == 400);
    CHECK(api.get("/api/slice", {{"row_stop", "999"}}).status == 400);

    CHECK(api.post("/api/alignment", {{"angle_deg", 1}}).status == 400);
    CHECK(api.post("/api/alignment", {{"angle_deg", al.angle_deg},
                                      {"row_range", {al.rows.start, al.rows.stop}},
                                      {"col_range", {al.cols.start, al.cols.stop}}})
              .status == 200);
    r = api.get("/api/slice", {{"k", "10"}});
    CHECK(r.body.at("width") == al.cols.size());
    CHECK(r.body.at("height") == al.rows.size());

    r = api.post("/api/run", {{"step", "align"}});
    CHECK(r.status == 200);
    r = api.post("/api/run", {{"through", "subsample"}});
    REQUIRE(r.status == 200);
    CHECK(r.body.at("session").at("steps")[1].at("state") == "done");

    r = api.get("/api/histogram");
    REQUIRE(r.status == 200);
    CHECK(r.body.at("bins") == kHistogramBins);
    const auto counts = r.body.at("counts").get<std::vector<std::uint64_t>>();
    CHECK(counts.size() == 500);
    const std::size_t nz = session.subsampled().data.nz();
    CHECK(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == kSubsampledSize * kSubsampledSize * nz);
    CHECK(api.get("/api/histogram", {{"bins", "64"}}).body.at("counts").size() == 64);
    CHECK(api.get("/api/histogram", {{"bins", "0"}}).status == 400);

    r = api.get("/api/zprofile");
    REQUIRE(r.status == 200);
    CHECK(r.body.at("profile").size() == nz);
    CHECK(r.body.at("cuts").size() == 1);

    CHECK(api.get("/api/tiers/1/divider").status == 409);  // no thresholds yet
    CHECK(api.post("/api/thresholds", {{"a_divider", 9}, {"b_divider", 3}}).status == 400);
    CHECK(api.post("/api/thresholds", {{"a_divider", th.a_divider}, {"b_divider", th.b_divider}, {"a_object", th.a_object}})
              .status == 200);
    r = api.get("/api/tiers/2/divider");
    REQUIRE(r.status == 200);
    CHECK(r.body.at("rotation").at("angles").size() == 201);
    CHECK(r.body.at("cuts").at("row_cuts").size() == 4);
    CHECK(r.body.at("mask").at("width") == kSubsampledSize);
    CHECK(api.get("/api/tiers/x/divider").status == 404);
    CHECK(api.get("/api/tiers/7/divider").status == 400);

    CHECK(api.post("/api/tier-cuts", {{"cuts", {1, 2}}}).status == 400);
    CHECK(api.post("/api/tier-cuts", {{"cuts", {30}}}).status == 200);
    CHECK(session.tier_cut_override() == std::vector<std::size_t>{30});
    CHECK(api.post("/api/tier-cuts", {{"cuts", nullptr}}).status == 200);
    CHECK_FALSE(session.tier_cut_override());
    CHECK(api.post("/api/grid-cuts", {{"tier", 1}, {"row_cuts", {0, 50, 100, 150}}}).status == 200);
    CHECK(session.grid_overrides().at(1).row_cuts->size() == 4);
    CHECK(api.post("/api/grid-cuts", {{"tier", 1}}).status == 200);
    CHECK(session.grid_overrides().empty());
    CHECK(api.post("/api/parameters", {{"isolevel", 21000}, {"pad", 2}}).status == 200);
    CHECK(session.isolevel() == 21000.0);
    CHECK(session.pad() == 2.0);
    CHECK(api.post("/api/parameters", {{"isolevel", nullptr}}).status == 200);
    CHECK(session.isolevel() == th.b_divider);
    CHECK(api.post("/api/run", {{"step", "bogus"}}).status == 400);
    CHECK(api.post("/api/thresholds", {{"a_divider", "x"}}).status == 400);
  }

  TEST_CASE("a second submission during a run gets 409") {
    const auto& scan = test::small_scan();
    test::TempDir out("busy");
    Session session(scan.options(out.path()));
    session.apply_config(parse_config(scan.config_text()));
    SessionApi api(session);
    std::atomic<bool> done{false};
    std::thread runner([&] {
      (void)api.post("/api/run", {{"through", "subsample"}});
      done = true;
    });
    bool busy = false;
    while (!done && !busy) {
      const ApiResponse r = api.post("/api/parameters", nlohmann::json::object());
      busy = r.status == 409 && r.body.at("error") == "Busy";
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    runner.join();
    CHECK(busy);
    CHECK(session.is_done(Step::Subsample));
  }

  TEST_CASE("bind parsing") {
    CHECK(parse_bind("0.0.0.0:9000").host == "0.0.0.0");
    CHECK(parse_bind("0.0.0.0:9000").port == 9000);
    CHECK(parse_bind(":81").host == "127.0.0.1");
    CHECK(parse_bind("0").port == 0);
    CHECK_THROWS_AS((void)parse_bind("host:http"), Error);
    CHECK_THROWS_AS((void)parse_bind("70000"), Error);
  }

  TEST_CASE("HTTP transport on a free port") {
    const auto& scan = test::small_scan();
    test::TempDir out("http");
    Session session(scan.options(out.path()));
    ServeOptions options;
    options.port = 0;
    ApiServer server(session, options);
    const int port = server.bind();
    REQUIRE(port > 0);
    std::thread t([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/api/session");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(nlohmann::json::parse(res->body).at("scan").at("width") == 240);
    res = client.Post("/api/thresholds", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = client.Post("/api/pad", "{}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 404);

    server.stop();
    t.join();
  }
}

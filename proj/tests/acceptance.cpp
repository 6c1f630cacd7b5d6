// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctpack/error.hpp"
#include "ctpack/marching_cubes.hpp"
#include "ctpack/metadata.hpp"
#include "ctpack/server.hpp"
#include "ctpack/session.hpp"
#include "ctpack/slice_io.hpp"
#include "ctpack/synth.hpp"
#include "oracles.hpp"
#include "scene_fixture.hpp"
#include "support.hpp"

using namespace ctpack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = test::file_bytes(e.path());
  return out;
}

SessionOptions session_options(const SynthOutput& scan, const fs::path& out) {
  SessionOptions o;
  o.scan_dir = scan.slice_dir;
  o.layout = scan.layout_csv;
  o.out = out;
  o.workers = 1;
  return o;
}

void decide_from_truth(Session& s, const GroundTruth& truth, double shift = 0.0) {
  s.set_alignment(truth.alignment);
  s.set_thresholds(truth.thresholds.shifted(shift));
}

// ---------------------------------------------------------------------------

// Shared by criteria 1 and 7: the default scene, processed once.
struct DefaultRun {
  test::TempDir dir{"accept"};
  SynthOutput scan;
  SessionReport report;
  double generate_s = 0.0;
  double pipeline_s = 0.0;
  std::size_t resident_slices = 0;
  std::size_t slice_bytes = 0;
  std::size_t subsampled_bytes = 0;
  std::size_t largest_subvolume = 0;
  fs::path mesh_dir;
  fs::path store_dir;
  std::vector<ObjectBox> boxes;
  nlohmann::json surface;
};

void process_default_scene(DefaultRun& r) {
  auto t0 = std::chrono::steady_clock::now();
  r.scan = generate(default_scene(1), r.dir / "scan");
  r.generate_s = seconds_since(t0);
  Session s(session_options(r.scan, r.dir / "out"));
  decide_from_truth(s, r.scan.truth);
  t0 = std::chrono::steady_clock::now();
  r.report = s.run();
  r.pipeline_s = seconds_since(t0);
  r.resident_slices = s.stack().max_resident_slices();
  r.slice_bytes = s.stack().slice_bytes();
  r.subsampled_bytes = kSubsampledSize * kSubsampledSize * ((s.stack().depth() + kZFactor - 1) / kZFactor) * sizeof(double);
  r.mesh_dir = s.mesh_dir();
  r.store_dir = s.store_dir();
  r.boxes = s.boxes();
  r.surface = read_json_file(s.sidecar(Step::Surface));
  const SubvolumeStore store(r.store_dir);
  for (const std::string& id : store.objects()) r.largest_subvolume = std::max(r.largest_subvolume, store.resident_bytes(id));
}

DefaultRun& default_run() {
  static DefaultRun run;
  static const bool ready = (process_default_scene(run), true);
  (void)ready;
  return run;
}

Outcome criterion_end_to_end() {
  Outcome o;
  const DefaultRun& r = default_run();
  const GroundTruth& truth = r.scan.truth;
  const double level = r.surface.at("isolevel").get<double>();

  std::set<std::string> expected, found;
  for (const TruthObject& obj : truth.objects) expected.insert(mesh_filename(obj.id, level));
  for (const auto& e : fs::directory_iterator(r.mesh_dir)) found.insert(e.path().filename().string());
  o.require(truth.objects.size() == 30, "30 ground-truth objects");
  o.require(found == expected, "PLY names {id}_iso{level}.ply, one per object");

  const ScoreReport score = score_boxes(truth, r.boxes);
  o.require(score.perfect(), "every extent inside its padded box");

  std::size_t centroids = 0;
  for (const auto& rep : r.surface.at("reports")) {
    if (rep.at("status") != "ok") continue;
    const auto c = rep.at("centroid_mm");
    const double s = 1000.0 / truth.voxel_pitch_um;
    if (truth.cell_contains(rep.at("identifier").get<std::string>(),
                            {c[0].get<double>() * s, c[1].get<double>() * s, c[2].get<double>() * s}))
      ++centroids;
  }
  o.require(centroids == truth.objects.size(), "every mesh centroid inside its cell");
  o.require(r.pipeline_s < 600.0, "runtime under 10 min");
  o.require(r.report.peak_tracked_bytes < (std::size_t{2} << 30), "peak tracked memory under 2 GiB");

  o.detail << "meshes " << found.size() << "/30, contained " << score.contained << "/" << score.truth_objects
           << ", centroids in cell " << centroids << "/" << truth.objects.size() << ", isolevel " << format_isolevel(level)
           << ", pipeline " << r.pipeline_s << " s (synth " << r.generate_s << " s), peak "
           << static_cast<double>(r.report.peak_tracked_bytes) / (1 << 20) << " MiB, 1 worker";
  return o;
}

Outcome criterion_rotation() {
  Outcome o;
  double worst = 0.0;
  for (double theta : {-8.0, -4.0, -1.9, 0.0, 2.5, 7.0}) {
    const RotationSweep sweep = auto_rotate(test::grid_mask(kSubsampledSize, 3, 4, theta));
    const double err = std::abs(sweep.angle_deg + theta);
    worst = std::max(worst, err);
    o.detail << theta << "->" << sweep.angle_deg << " ";
    o.require(err <= 0.2, "theta " + std::to_string(theta));
  }
  o.detail << "(max |err| " << worst << " deg)";
  return o;
}

Outcome criterion_tiers() {
  Outcome o;
  o.require(kTierMinWidth == 10.0, "minimum width is 10");
  for (std::size_t n : {1u, 3u, 4u}) {
    test::TempDir dir("tiers");
    SceneSpec spec = small_scene(n, 11 + n, 240);
    const SynthOutput scan = generate(spec, dir.path());
    const SubsampledVolume v = subsample(SliceStack::open(scan.slice_dir), scan.truth.alignment);
    const TierDetection d = detect_tier_boundaries(z_profile(v.data), n);
    o.require(d.cuts.size() + 1 == n, std::to_string(n) + "-tier cut count");
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < n && k < d.cuts.size(); ++k) {
      const double truth_cut = scan.truth.gap_centers[k] / static_cast<double>(kZFactor);
      worst = std::max(worst, std::abs(static_cast<double>(d.cuts[k]) - truth_cut));
    }
    for (const Peak& p : d.candidates) o.require(p.width >= kTierMinWidth, "candidate narrower than 10");
    o.require(worst <= 2.0, std::to_string(n) + "-tier cuts within 2 slices");
    o.detail << n << " tiers: cuts [";
    for (std::size_t c : d.cuts) o.detail << " " << c;
    o.detail << " ] max err " << worst << "; ";
  }
  // a dip narrower than 10 planes is not a boundary
  std::vector<double> profile(120, 100.0);
  for (std::size_t k = 57; k < 63; ++k) profile[k] = 10.0;
  bool refused = false;
  try {
    (void)detect_tier_boundaries(profile, 2);
  } catch (const Error& e) {
    refused = e.code() == Errc::InsufficientPeaks;
  }
  o.require(refused, "6-plane dip rejected");
  o.detail << "6-plane dip rejected";
  return o;
}

Outcome criterion_subsample() {
  Outcome o;
  {
    test::TempDir dir("sub");
    test::write_random_stack(dir.path(), 300, 280, 64, 21);
    const SliceStack stack = SliceStack::open(dir.path());
    const AlignmentParams p{2.9, {20, 262}, {15, 290}};
    const SubsampledVolume v = subsample(stack, p);
    std::vector<Slice16> slices;
    for (std::size_t k = 1; k <= stack.depth(); ++k) slices.push_back(*stack.read(k));
    const double err = test::max_relative_error(v.data, test::brute_force_subsample(slices, p, kSubsampledSize, kZFactor));
    o.require(err < 1e-6, "300x280x64 within 1e-6");
    o.detail << "300x280x64 -> 225x225x" << v.depth() << " max rel err " << err << "; ";
  }
  {
    test::TempDir dir("deep");
    test::write_random_stack(dir.path(), 12, 10, 3813, 8);
    const SliceStack stack = SliceStack::open(dir.path());
    const AlignmentParams p{-4.0, {1, 9}, {2, 11}};
    SubsampleOptions options;
    options.size = 5;
    const SubsampledVolume v = subsample(stack, p, options);
    std::vector<Slice16> slices;
    for (std::size_t k = 1; k <= stack.depth(); ++k) slices.push_back(*stack.read(k));
    const double err = test::max_relative_error(v.data, test::brute_force_subsample(slices, p, 5, kZFactor));
    const std::vector<Slice16> tail(slices.end() - 3, slices.end());
    const auto tail_oracle = test::brute_force_subsample(tail, p, 5, kZFactor);
    double tail_err = 0.0;
    for (std::size_t i = 0; i < 25; ++i)
      tail_err = std::max(tail_err, std::abs(v.data.plane(381)[i] - tail_oracle.plane(0)[i]) / std::max(1.0, tail_oracle.plane(0)[i]));
    o.require(v.depth() == 382, "h=3813 gives depth 382");
    o.require(err < 1e-6, "h=3813 within 1e-6");
    o.require(tail_err < 1e-6, "remainder batch of 3");
    o.detail << "h=3813 -> depth " << v.depth() << " max rel err " << err << ", remainder-of-3 err " << tail_err;
  }
  return o;
}

Outcome criterion_marching_cubes() {
  Outcome o;
  Volume16 v(64, 64, 64);
  auto fill = [&](double r) {
    for (std::size_t z = 0; z < 64; ++z)
      for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x) {
          const double d = std::sqrt((x - 31.5) * (x - 31.5) + (y - 31.5) * (y - 31.5) + (z - 31.5) * (z - 31.5));
          v(x, y, z) = static_cast<std::uint16_t>(std::clamp(20000.0 + 1000.0 * (r - d), 0.0, 65535.0));
        }
  };
  fill(20.0);
  const Mesh m = marching_cubes(v, 20000.0);
  const double area = surface_area(m);
  const double rel = std::abs(area - 4.0 * kPi * 400.0) / (4.0 * kPi * 400.0);
  o.require(is_watertight(m), "watertight");
  o.require(euler_characteristic(m) == 2, "Euler characteristic 2");
  o.require(rel < 0.05, "area within 5%");
  o.detail << "r=20: watertight " << is_watertight(m) << ", chi " << euler_characteristic(m) << ", area err "
           << rel * 100.0 << "%; volumes";
  double last = 1e300;
  for (double level : {19000.0, 20000.0, 21000.0}) {
    const double vol = enclosed_volume(marching_cubes(v, level));
    o.require(vol < last, "volume decreases with isolevel");
    last = vol;
    o.detail << " " << vol;
  }
  return o;
}

Outcome criterion_shift() {
  Outcome o;
  test::TempDir dir("shift");
  SceneSpec spec = small_scene(3, 5, 240);
  spec.offset = 0.0;
  const SynthOutput base = generate(spec, dir / "base");
  const SliceStack stack = SliceStack::open(base.slice_dir);
  std::vector<std::vector<ObjectBox>> results;
  for (double c : {0.0, 11000.0, 21000.0}) {
    SynthOutput scan = base;
    if (c > 0.0) {
      scan.slice_dir = dir / ("shift" + std::to_string(static_cast<int>(c)));
      fs::create_directories(scan.slice_dir);
      fs::copy_file(base.slice_dir / "scan.json", scan.slice_dir / "scan.json");
      for (std::size_t k = 1; k <= stack.depth(); ++k) {
        Slice16 s = *stack.read(k);
        for (auto& px : s.pixels()) {
          o.require(px + c <= 65535.0, "shifted values fit 16 bits");
          px = static_cast<std::uint16_t>(px + c);
        }
        write_slice_tiff(scan.slice_dir / stack.files()[k - 1].filename(), s);
      }
    }
    Session s(session_options(scan, dir / ("out" + std::to_string(static_cast<int>(c)))));
    decide_from_truth(s, base.truth, c);
    s.run(Step::Grid);
    results.push_back(s.boxes());
  }
  o.require(results[0].size() == base.truth.objects.size(), "one box per object");
  o.require(results[1] == results[0], "c=11000 boxes identical");
  o.require(results[2] == results[0], "c=21000 boxes identical");
  o.detail << results[0].size() << " boxes; c=11000 " << (results[1] == results[0] ? "identical" : "differ")
           << ", c=21000 " << (results[2] == results[0] ? "identical" : "differ");
  return o;
}

Outcome criterion_memory() {
  Outcome o;
  const DefaultRun& r = default_run();
  const std::size_t bound = r.resident_slices * r.slice_bytes + r.subsampled_bytes + r.largest_subvolume;
  std::size_t worst = 0;
  for (const StepTiming& t : r.report.steps) {
    o.require(t.peak_tracked_bytes <= bound, "step " + std::string(to_string(t.step)) + " within bound");
    worst = std::max(worst, t.peak_tracked_bytes);
    o.detail << to_string(t.step) << " " << t.peak_tracked_bytes / 1024 << " KiB, ";
  }
  o.detail << "bound " << bound / 1024 << " KiB (" << r.resident_slices << " x " << r.slice_bytes
           << " + " << r.subsampled_bytes << " + " << r.largest_subvolume << "); ";

  const SubvolumeStore store(r.store_dir);
  const std::string id = store.objects().front();
  const std::size_t need = store.resident_bytes(id);
  bool refused = false;
  std::size_t peak_during = 0;
  const std::size_t before = MemoryTracker::instance().current();
  {
    PeakScope scope;
    try {
      (void)store.load(id, need - 1);
    } catch (const Error& e) {
      refused = e.code() == Errc::ExceedsMemoryBudget;
    }
    peak_during = scope.peak();
  }
  o.require(refused, "load above budget refused");
  o.require(peak_during == before, "nothing allocated before refusing");
  const bool loads = store.load(id, need).bytes() == need;
  o.require(loads, "load at budget succeeds");
  o.detail << "load of " << need << " B with budget " << need - 1 << " refused without allocating";
  return o;
}

Outcome criterion_decision_sources() {
  Outcome o;
  const test::SmallScan& scan = test::small_scan();
  test::TempDir dir("sources");

  Session a(session_options(scan.out, dir / "config"));
  {
    std::ofstream cfg(dir / "scan.toml");
    cfg << scan.config_text();
  }
  a.apply_config(load_config(dir / "scan.toml"));
  a.run();

  Session b(session_options(scan.out, dir / "api"));
  SessionApi api(b);
  const auto& al = scan.out.truth.alignment;
  const auto& th = scan.out.truth.thresholds;
  int status = api.post("/api/alignment", {{"angle_deg", al.angle_deg},
                                           {"row_range", {al.rows.start, al.rows.stop}},
                                           {"col_range", {al.cols.start, al.cols.stop}}})
                   .status;
  status = std::max(status, api.post("/api/thresholds", {{"a_divider", th.a_divider},
                                                         {"b_divider", th.b_divider},
                                                         {"a_object", th.a_object}})
                                .status);
  status = std::max(status, api.post("/api/parameters", {{"pad", 3}}).status);
  status = std::max(status, api.post("/api/run", {{"through", "surface"}}).status);
  o.require(status == 200, "API calls succeed");

  const auto meta_a = tree_bytes(a.meta_dir()), meta_b = tree_bytes(b.meta_dir());
  const auto mesh_a = tree_bytes(a.mesh_dir()), mesh_b = tree_bytes(b.mesh_dir());
  o.require(!mesh_a.empty() && mesh_a.size() == scan.out.truth.objects.size(), "meshes written");
  o.require(meta_a == meta_b, "sidecars byte-identical");
  o.require(mesh_a == mesh_b, "meshes byte-identical");
  o.detail << meta_a.size() << " sidecar/decision files and " << mesh_a.size() << " meshes compared byte for byte";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 end-to-end recovery on the default synthetic scan", criterion_end_to_end},
      {"2 rotation recovery", criterion_rotation},
      {"3 tier boundaries", criterion_tiers},
      {"4 subsampling oracle", criterion_subsample},
      {"5 marching cubes oracle", criterion_marching_cubes},
      {"6 shift invariance", criterion_shift},
      {"7 memory contract", criterion_memory},
      {"8 decision-source equivalence", criterion_decision_sources},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "ctpack/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "ctpack/error.hpp"
#include "ctpack/memory.hpp"
#include "ctpack/metadata.hpp"
#include "ctpack/subvolume_store.hpp"

namespace ctpack {
namespace {

constexpr std::string_view kStepNames[kStepCount] = {"align", "subsample", "thresholds", "tiers",
                                                     "grid",  "extract",   "surface"};

std::size_t idx(Step s) { return static_cast<std::size_t>(s); }

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void remove_path(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::remove_all(p, ec);
}

// Re-raises an error with the step name in front, keeping its code.
template <typename F>
void with_step_context(Step step, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    if (e.code() == Errc::MissingDecision) throw;
    throw Error(e.code(), "step " + std::string(to_string(step)) + ": " + e.message());
  }
}

}  // namespace

std::string_view to_string(Step step) noexcept { return kStepNames[idx(step)]; }

Step step_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kStepCount; ++i)
    if (kStepNames[i] == name) return static_cast<Step>(i);
  fail(Errc::InvalidArgument, "unknown step '" + std::string(name) + "'");
}

std::vector<Step> all_steps() {
  std::vector<Step> out;
  for (std::size_t i = 0; i < kStepCount; ++i) out.push_back(static_cast<Step>(i));
  return out;
}

nlohmann::json SessionReport::to_json() const {
  nlohmann::json j;
  j["steps"] = nlohmann::json::array();
  for (const StepTiming& t : steps)
    j["steps"].push_back(
        {{"step", to_string(t.step)}, {"seconds", t.seconds}, {"peak_tracked_bytes", t.peak_tracked_bytes}});
  j["objects_processed"] = objects_processed;
  j["failures"] = failures;
  j["warnings"] = warnings;
  j["peak_tracked_bytes"] = peak_tracked_bytes;
  return j;
}

// ---------------------------------------------------------------------------

Session::Session(SessionOptions options) : options_(std::move(options)) {
  if (options_.out.empty()) fail(Errc::InvalidArgument, "output directory required");
  stack_ = std::make_unique<SliceStack>(SliceStack::open(options_.scan_dir, options_.resident_slices));
  layout_ = load_layout(options_.layout.string());
  std::filesystem::create_directories(meta_dir() / "decisions");
  if (options_.isolevel) set_isolevel(options_.isolevel);
  if (options_.pad) set_pad(options_.pad);
}

std::filesystem::path Session::sidecar(Step step) const {
  if (step == Step::Subsample) return meta_dir() / "subsampled.json";
  return meta_dir() / (std::string(to_string(step)) + ".json");
}

std::filesystem::path Session::decision_file(std::string_view name) const {
  return meta_dir() / "decisions" / (std::string(name) + ".json");
}

bool Session::write_decision(std::string_view name, const nlohmann::json& value) {
  const auto file = decision_file(name);
  if (read_file(file) == value.dump(2) + "\n") return false;
  write_json_file(file, value);
  return true;
}

bool Session::erase_decision(std::string_view name) {
  std::error_code ec;
  return std::filesystem::remove(decision_file(name), ec);
}

std::optional<nlohmann::json> Session::read_decision(std::string_view name) const {
  const auto file = decision_file(name);
  if (!std::filesystem::exists(file)) return std::nullopt;
  return read_json_file(file);
}

void Session::set_alignment(const AlignmentParams& params) {
  params.validate(stack_->width(), stack_->height());
  if (write_decision("alignment", to_json(params))) invalidate_from(Step::Align);
}

void Session::set_thresholds(const ThresholdSet& thresholds) {
  thresholds.validate();
  if (write_decision("thresholds", to_json(thresholds))) invalidate_from(Step::Thresholds);
}

void Session::set_tier_cuts(const std::optional<std::vector<std::size_t>>& cuts) {
  bool changed = false;
  if (cuts) {
    if (cuts->size() + 1 != layout_.tier_count())
      fail(Errc::InvalidArgument, "expected " + std::to_string(layout_.tier_count() - 1) + " tier cuts, have " +
                                      std::to_string(cuts->size()));
    changed = write_decision("tier_cuts", {{"cuts", *cuts}});
  } else {
    changed = erase_decision("tier_cuts");
  }
  if (changed) invalidate_from(Step::Tiers);
}

void Session::set_grid_cuts(int tier, const std::optional<GridOverride>& cuts) {
  (void)layout_.tier(tier);  // OutOfBounds for unknown tiers
  nlohmann::json all = read_decision("grid_cuts").value_or(nlohmann::json{{"tiers", nlohmann::json::object()}});
  const std::string key = std::to_string(tier);
  if (cuts && (cuts->row_cuts || cuts->col_cuts)) {
    nlohmann::json entry = nlohmann::json::object();
    if (cuts->row_cuts) entry["row_cuts"] = *cuts->row_cuts;
    if (cuts->col_cuts) entry["col_cuts"] = *cuts->col_cuts;
    all["tiers"][key] = entry;
  } else {
    all["tiers"].erase(key);
  }
  const bool changed = all["tiers"].empty() ? erase_decision("grid_cuts") : write_decision("grid_cuts", all);
  if (changed) invalidate_from(Step::Grid);
}

namespace {

void set_parameter(nlohmann::json& params, const char* key, std::optional<double> value) {
  if (value)
    params[key] = *value;
  else
    params.erase(key);
}

}  // namespace

void Session::set_isolevel(std::optional<double> isolevel) {
  auto params = read_decision("parameters").value_or(nlohmann::json::object());
  set_parameter(params, "isolevel", isolevel);
  if (write_decision("parameters", params)) invalidate_from(Step::Surface);
}

void Session::set_pad(std::optional<double> pad) {
  if (pad && *pad < 0) fail(Errc::InvalidArgument, "padding must be non-negative");
  auto params = read_decision("parameters").value_or(nlohmann::json::object());
  set_parameter(params, "pad", pad);
  if (write_decision("parameters", params)) invalidate_from(Step::Grid);
}

void Session::set_voxel_pitch(std::optional<double> pitch_um) {
  if (pitch_um && *pitch_um <= 0) fail(Errc::InvalidArgument, "voxel pitch must be positive");
  auto params = read_decision("parameters").value_or(nlohmann::json::object());
  set_parameter(params, "voxel_pitch_um", pitch_um);
  if (write_decision("parameters", params)) invalidate_from(Step::Surface);
}

void Session::apply_config(const ScanConfig& config) {
  if (config.alignment) set_alignment(*config.alignment);
  if (config.thresholds) set_thresholds(*config.thresholds);
  if (config.tier_cuts) set_tier_cuts(config.tier_cuts);
  for (const auto& [tier, cuts] : config.grid_cuts) set_grid_cuts(tier, cuts);
  if (config.pad) set_pad(config.pad);
  if (config.isolevel) set_isolevel(config.isolevel);
  if (config.voxel_pitch_um) set_voxel_pitch(config.voxel_pitch_um);
}

std::optional<AlignmentParams> Session::alignment() const {
  if (auto j = read_decision("alignment")) return alignment_from_json(*j);
  return std::nullopt;
}

std::optional<ThresholdSet> Session::thresholds() const {
  if (auto j = read_decision("thresholds")) return thresholds_from_json(*j);
  return std::nullopt;
}

std::optional<std::vector<std::size_t>> Session::tier_cut_override() const {
  if (auto j = read_decision("tier_cuts")) return j->at("cuts").get<std::vector<std::size_t>>();
  return std::nullopt;
}

std::map<int, GridOverride> Session::grid_overrides() const {
  std::map<int, GridOverride> out;
  if (auto j = read_decision("grid_cuts")) {
    for (const auto& [key, entry] : j->at("tiers").items()) {
      GridOverride g;
      if (entry.contains("row_cuts")) g.row_cuts = entry.at("row_cuts").get<std::vector<double>>();
      if (entry.contains("col_cuts")) g.col_cuts = entry.at("col_cuts").get<std::vector<double>>();
      out[std::stoi(key)] = g;
    }
  }
  return out;
}

double Session::isolevel() const {
  const auto params = read_decision("parameters");
  if (params && params->contains("isolevel")) return params->at("isolevel").get<double>();
  const auto t = thresholds();
  if (!t) fail(Errc::MissingDecision, "surface: no isolevel and no thresholds to default it from");
  return t->b_divider;
}

double Session::pad() const {
  const auto params = read_decision("parameters");
  if (params && params->contains("pad")) return params->at("pad").get<double>();
  return kDefaultPad;
}

double Session::voxel_pitch_um() const {
  const auto params = read_decision("parameters");
  if (params && params->contains("voxel_pitch_um")) return params->at("voxel_pitch_um").get<double>();
  if (stack_->voxel_pitch_um()) return *stack_->voxel_pitch_um();
  fail(Errc::MissingDecision, "surface: voxel pitch not in scan.json or config");
}

bool Session::is_done(Step step) const { return std::filesystem::exists(sidecar(step)); }

std::string Session::step_state(Step step) const {
  if (is_done(step)) return "done";
  const bool decided = (step == Step::Align && read_decision("alignment")) ||
                       (step == Step::Thresholds && read_decision("thresholds")) ||
                       (step == Step::Tiers && read_decision("tier_cuts")) ||
                       (step == Step::Grid && read_decision("grid_cuts"));
  return decided ? "ratified" : "pending";
}

void Session::invalidate_from(Step from) {
  for (std::size_t i = idx(from); i < kStepCount; ++i) {
    const Step s = static_cast<Step>(i);
    remove_path(sidecar(s));
    switch (s) {
      case Step::Subsample:
        remove_path(meta_dir() / "subsampled.raw");
        subsampled_.reset();
        break;
      case Step::Grid:
        remove_path(meta_dir() / "boxes.json");
        break;
      case Step::Extract:
        remove_path(store_dir());
        break;
      case Step::Surface:
        remove_path(mesh_dir());
        break;
      default:
        break;
    }
  }
}

void Session::require_done(Step step) const {
  if (!is_done(step))
    fail(Errc::InvalidArgument, "step '" + std::string(to_string(step)) + "' has not been run");
}

void Session::run_step(Step step) {
  if (step != Step::Align) require_done(static_cast<Step>(idx(step) - 1));
  invalidate_from(step);
  with_step_context(step, [&] {
    switch (step) {
      case Step::Align: step_align(); break;
      case Step::Subsample: step_subsample(); break;
      case Step::Thresholds: step_thresholds(); break;
      case Step::Tiers: step_tiers(); break;
      case Step::Grid: step_grid(); break;
      case Step::Extract: step_extract(); break;
      case Step::Surface: step_surface(); break;
    }
  });
}

SessionReport Session::run(Step through) {
  SessionReport report;
  auto& tracker = MemoryTracker::instance();
  std::size_t overall_peak = 0;
  for (std::size_t i = 0; i <= idx(through); ++i) {
    const Step step = static_cast<Step>(i);
    if (is_done(step)) continue;
    // Extraction and surfacing never need the proxy volume.
    if (step == Step::Extract) release_subsampled();
    tracker.reset_peak();
    const auto t0 = std::chrono::steady_clock::now();
    run_step(step);
    const auto t1 = std::chrono::steady_clock::now();
    report.steps.push_back({step, std::chrono::duration<double>(t1 - t0).count(), tracker.peak()});
    overall_peak = std::max(overall_peak, tracker.peak());
  }
  report.peak_tracked_bytes = overall_peak;
  for (const std::string& w : validate_asymmetry(layout_).warnings()) report.warnings.push_back(w);
  if (is_done(Step::Surface) && idx(through) >= idx(Step::Surface)) {
    const auto j = read_json_file(sidecar(Step::Surface));
    for (const auto& r : j.at("reports")) {
      ++report.objects_processed;
      if (r.at("status") != "ok")
        report.failures.push_back(r.at("identifier").get<std::string>() + ": " + r.value("message", r.at("status").get<std::string>()));
      else if (!r.at("watertight").get<bool>())
        report.warnings.push_back(r.at("identifier").get<std::string>() + ": mesh is not watertight");
    }
  } else if (is_done(Step::Extract) && idx(through) >= idx(Step::Extract)) {
    report.objects_processed = read_json_file(sidecar(Step::Extract)).at("objects").size();
  }
  write_json_file(options_.out / "report.json", report.to_json());
  return report;
}

// ---------------------------------------------------------------------------
// Steps

void Session::step_align() {
  const auto params = alignment();
  if (!params) fail(Errc::MissingDecision, "align: no alignment given (config 'alignment' or POST /api/alignment)");
  params->validate(stack_->width(), stack_->height());
  nlohmann::json tiers = nlohmann::json::array();
  for (const TierLayout& t : layout_.tiers)
    tiers.push_back({{"tier", t.tier_index}, {"rows", t.n_rows()}, {"cols", t.n_cols()}, {"occupied", t.occupied_count()}});
  const nlohmann::json j = {
      {"alignment", to_json(*params)},
      {"alignment_text", format_alignment(*params)},
      {"scan", {{"width", stack_->width()}, {"height", stack_->height()}, {"depth", stack_->depth()}}},
      {"cropped", {{"width", params->cols.size()}, {"height", params->rows.size()}}},
      {"layout", {{"scan_id", layout_.scan_id}, {"tiers", tiers}}},
      {"symmetry_warnings", validate_asymmetry(layout_).warnings()},
  };
  write_json_file(sidecar(Step::Align), j);
}

void Session::step_subsample() {
  const AlignmentParams params = alignment_from_json(read_json_file(sidecar(Step::Align)).at("alignment"));
  subsampled_ = subsample(*stack_, params);
  // The header is the sidecar; it is written last so a crash mid-write
  // leaves the step undone.
  save_subsampled(meta_dir() / "subsampled", *subsampled_);
}

const SubsampledVolume& Session::subsampled() {
  require_done(Step::Subsample);
  if (!subsampled_) subsampled_ = load_subsampled(meta_dir() / "subsampled");
  return *subsampled_;
}

void Session::release_subsampled() noexcept { subsampled_.reset(); }

Histogram Session::volume_histogram(std::size_t bins) { return histogram(subsampled().data, bins); }

void Session::step_thresholds() {
  const auto t = thresholds();
  if (!t) fail(Errc::MissingDecision, "thresholds: no thresholds given (config [thresholds] or POST /api/thresholds)");
  t->validate();
  write_json_file(sidecar(Step::Thresholds), {{"thresholds", to_json(*t)}, {"histogram", to_json(volume_histogram())}});
}

TierDetection Session::tier_detection(std::optional<std::vector<std::size_t>> override_cuts) {
  const std::vector<double> profile = z_profile(subsampled().data);
  return detect_tier_boundaries(profile, layout_.tier_count(), kTierMinWidth, override_cuts);
}

void Session::step_tiers() {
  require_done(Step::Thresholds);
  const std::vector<double> profile = z_profile(subsampled().data);
  const TierDetection d = detect_tier_boundaries(profile, layout_.tier_count(), kTierMinWidth, tier_cut_override());
  nlohmann::json candidates = nlohmann::json::array();
  for (const Peak& p : d.candidates) candidates.push_back(to_json(p));
  nlohmann::json slabs = nlohmann::json::array();
  for (const TierSlab& s : d.slabs) slabs.push_back(to_json(s));
  write_json_file(sidecar(Step::Tiers), {{"min_width", kTierMinWidth},
                                         {"profile", profile},
                                         {"candidates", candidates},
                                         {"detected_cuts", d.detected_cuts},
                                         {"cuts", d.cuts},
                                         {"ratified", d.ratified},
                                         {"slabs", slabs}});
}

std::vector<TierSlab> Session::slabs() const {
  require_done(Step::Tiers);
  std::vector<TierSlab> out;
  const nlohmann::json slabs_doc = read_json_file(sidecar(Step::Tiers));
  for (const auto& s : slabs_doc.at("slabs")) out.push_back(slab_from_json(s));
  return out;
}

void Session::step_grid() {
  const ThresholdSet t = thresholds_from_json(read_json_file(sidecar(Step::Thresholds)).at("thresholds"));
  const std::vector<TierSlab> tier_slabs = slabs();
  const SubsampledVolume& vol = subsampled();
  const ScanGeometry geometry = ScanGeometry::from(vol);
  const auto overrides = grid_overrides();
  const double padding = pad();

  nlohmann::json tiers = nlohmann::json::array();
  nlohmann::json boxes = nlohmann::json::array();
  for (std::size_t k = 0; k < tier_slabs.size(); ++k) {
    const TierLayout& tier = layout_.tiers[k];
    try {
      const DividerImage div = divider_image(vol.data, tier_slabs[k], t);
      const RotationSweep sweep = auto_rotate(div.mask);
      const Image2D<double> rotated = rotate_image(div.mask, sweep.angle_deg);
      auto it = overrides.find(tier.tier_index);
      const GridCuts cuts = grid_segment(rotated, tier.n_rows(), tier.n_cols(), sweep.angle_deg,
                                         it == overrides.end() ? GridOverride{} : it->second);
      std::size_t support = 0;
      for (double v : div.mask.pixels()) support += v > 0 ? 1 : 0;
      tiers.push_back({{"tier", tier.tier_index},
                       {"slab", to_json(tier_slabs[k])},
                       {"rotation", {{"angle_deg", sweep.angle_deg}, {"best_sample_deg", sweep.best_sample_deg}}},
                       {"mask_support", support},
                       {"ratified", it != overrides.end()},
                       {"cuts", to_json(cuts)}});
      for (const ObjectBox& b : boxes_to_fullres(cuts, tier_slabs[k], tier, geometry, padding))
        boxes.push_back(to_json(b));
    } catch (const Error& e) {
      throw Error(e.code(), "tier " + std::to_string(tier.tier_index) + ": " + e.message());
    }
  }
  write_json_file(meta_dir() / "boxes.json", {{"pad", padding}, {"boxes", boxes}});
  write_json_file(sidecar(Step::Grid), {{"tiers", tiers}});
}

std::vector<ObjectBox> Session::boxes() const {
  require_done(Step::Grid);
  std::vector<ObjectBox> out;
  const nlohmann::json boxes_doc = read_json_file(meta_dir() / "boxes.json");
  for (const auto& b : boxes_doc.at("boxes")) out.push_back(object_box_from_json(b));
  return out;
}

void Session::step_extract() {
  const std::vector<ObjectBox> all = boxes();
  SubvolumeStore store(store_dir());
  std::size_t z_lo = stack_->depth(), z_hi = 0;
  for (const ObjectBox& b : all) {
    nlohmann::json transform = to_json(b).at("provenance");
    store.register_object(b.id, b.box.nx(), b.box.ny(), b.box.nz(), to_json(b.box), transform);
    z_lo = std::min(z_lo, b.box.z0);
    z_hi = std::max(z_hi, b.box.z1);
  }
  // One pass over the slices; each decoded slice feeds every box it crosses.
  for (std::size_t z = z_lo; z < z_hi; ++z) {
    const ResidentSlice slice = stack_->read(z + 1);
    for (const ObjectBox& b : all) {
      if (z < b.box.z0 || z >= b.box.z1) continue;
      Slice16 chunk(b.box.nx(), b.box.ny());
      for (std::size_t y = 0; y < b.box.ny(); ++y) {
        const auto src = slice->row(b.box.y0 + y).subspan(b.box.x0, b.box.nx());
        std::copy(src.begin(), src.end(), chunk.row(y).begin());
      }
      store.append(b.id, z - b.box.z0, chunk);
    }
  }
  nlohmann::json objects = nlohmann::json::array();
  for (const ObjectBox& b : all) {
    store.finalize(b.id);
    objects.push_back({{"id", b.id},
                       {"dims", {b.box.nx(), b.box.ny(), b.box.nz()}},
                       {"box", to_json(b.box)},
                       {"bytes", store.resident_bytes(b.id)}});
  }
  write_json_file(sidecar(Step::Extract), {{"slices_read", z_hi > z_lo ? z_hi - z_lo : 0}, {"objects", objects}});
}

void Session::step_surface() {
  const SubvolumeStore store(store_dir());
  const double level = isolevel();
  const double pitch = voxel_pitch_um();
  std::vector<SurfaceJob> jobs;
  const nlohmann::json objects_doc = read_json_file(sidecar(Step::Extract));
  for (const auto& o : objects_doc.at("objects")) {
    const BoxRange box = box_range_from_json(o.at("box"));
    jobs.push_back({o.at("id").get<std::string>(), level, pitch, mesh_dir(),
                    Vec3{static_cast<double>(box.x0), static_cast<double>(box.y0), static_cast<double>(box.z0)}});
  }
  const std::size_t workers = options_.workers ? options_.workers : std::max(1u, std::thread::hardware_concurrency());
  const std::vector<SurfaceReport> reports = surface_all(store, jobs, options_.memory_budget, workers);
  nlohmann::json list = nlohmann::json::array();
  for (const SurfaceReport& r : reports) list.push_back(to_json(r));
  write_json_file(sidecar(Step::Surface), {{"isolevel", level}, {"voxel_pitch_um", pitch}, {"reports", list}});
}

// ---------------------------------------------------------------------------

nlohmann::json Session::state() const {
  nlohmann::json steps = nlohmann::json::array();
  for (Step s : all_steps())
    steps.push_back({{"step", to_string(s)}, {"state", step_state(s)}, {"sidecar", sidecar(s).filename().string()}});
  nlohmann::json tiers = nlohmann::json::array();
  for (const TierLayout& t : layout_.tiers)
    tiers.push_back({{"tier", t.tier_index}, {"rows", t.n_rows()}, {"cols", t.n_cols()}, {"occupied", t.occupied_count()}});
  nlohmann::json decisions = nlohmann::json::object();
  for (const char* name : {"alignment", "thresholds", "tier_cuts", "grid_cuts", "parameters"})
    if (auto d = read_decision(name)) decisions[name] = *d;
  return {{"scan", {{"width", stack_->width()}, {"height", stack_->height()}, {"depth", stack_->depth()}}},
          {"layout", {{"scan_id", layout_.scan_id}, {"tiers", tiers}}},
          {"memory_budget", options_.memory_budget},
          {"workers", options_.workers},
          {"steps", steps},
          {"decisions", decisions}};
}

}  // namespace ctpack

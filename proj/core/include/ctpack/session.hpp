#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ctpack/config.hpp"
#include "ctpack/layout.hpp"
#include "ctpack/segmentation.hpp"
#include "ctpack/slice_stack.hpp"
#include "ctpack/subsample.hpp"
#include "ctpack/surfacing.hpp"

namespace ctpack {

enum class Step { Align, Subsample, Thresholds, Tiers, Grid, Extract, Surface };

inline constexpr std::size_t kStepCount = 7;
std::string_view to_string(Step step) noexcept;
Step step_from_string(std::string_view name);  // InvalidArgument for unknown names
std::vector<Step> all_steps();

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{16} << 30;

struct SessionOptions {
  std::filesystem::path scan_dir;
  std::filesystem::path layout;
  std::filesystem::path out;
  std::size_t memory_budget = kDefaultMemoryBudget;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::size_t resident_slices = SliceStack::kDefaultResidentSlices;
  std::optional<double> isolevel;  // command-line override of the config / default
  std::optional<double> pad;
};

struct StepTiming {
  Step step;
  double seconds = 0.0;
  std::size_t peak_tracked_bytes = 0;
};

struct SessionReport {
  std::vector<StepTiming> steps;
  std::size_t objects_processed = 0;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  std::size_t peak_tracked_bytes = 0;

  nlohmann::json to_json() const;
};

/// One scan being processed. Human decisions (alignment, thresholds and
/// optional tier/grid overrides) live in `<out>/meta/decisions/` and step
/// outputs in `<out>/meta/<step>.json`; both the config file and the session
/// API go through the same setters, so the sidecars do not depend on where a
/// decision came from. Changing a decision or re-running a step deletes the
/// outputs of every later step.
class Session {
 public:
  explicit Session(SessionOptions options);

  [[nodiscard]] const SessionOptions& options() const noexcept { return options_; }
  [[nodiscard]] const SliceStack& stack() const noexcept { return *stack_; }
  [[nodiscard]] const ScanLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::filesystem::path meta_dir() const { return options_.out / "meta"; }
  [[nodiscard]] std::filesystem::path mesh_dir() const { return options_.out / "meshes"; }
  [[nodiscard]] std::filesystem::path store_dir() const { return options_.out / "subvolumes"; }
  [[nodiscard]] std::filesystem::path sidecar(Step step) const;

  // decisions
  void set_alignment(const AlignmentParams& params);
  void set_thresholds(const ThresholdSet& thresholds);
  void set_tier_cuts(const std::optional<std::vector<std::size_t>>& cuts);
  void set_grid_cuts(int tier, const std::optional<GridOverride>& cuts);
  void set_isolevel(std::optional<double> isolevel);
  void set_pad(std::optional<double> pad);
  void set_voxel_pitch(std::optional<double> pitch_um);
  void apply_config(const ScanConfig& config);

  [[nodiscard]] std::optional<AlignmentParams> alignment() const;
  [[nodiscard]] std::optional<ThresholdSet> thresholds() const;
  [[nodiscard]] std::optional<std::vector<std::size_t>> tier_cut_override() const;
  [[nodiscard]] std::map<int, GridOverride> grid_overrides() const;

  /// pending | ratified (decision present, step not run) | done
  [[nodiscard]] std::string step_state(Step step) const;
  [[nodiscard]] bool is_done(Step step) const;

  /// Runs one step; its predecessors must be done. Deletes later outputs first.
  void run_step(Step step);

  /// Runs every step that is not yet done, up to and including `through`.
  SessionReport run(Step through = Step::Surface);

  /// Deletes the outputs of `from` and every later step.
  void invalidate_from(Step from);

  // Views used by the session API (all computed by the pipeline functions).
  [[nodiscard]] nlohmann::json state() const;
  const SubsampledVolume& subsampled();
  void release_subsampled() noexcept;
  [[nodiscard]] Histogram volume_histogram(std::size_t bins = kHistogramBins);
  [[nodiscard]] TierDetection tier_detection(std::optional<std::vector<std::size_t>> override_cuts);
  [[nodiscard]] std::vector<TierSlab> slabs() const;  // from the tiers sidecar
  [[nodiscard]] std::vector<ObjectBox> boxes() const;  // from the grid step's boxes sidecar
  [[nodiscard]] double isolevel() const;
  [[nodiscard]] double pad() const;
  [[nodiscard]] double voxel_pitch_um() const;

 private:
  void require_done(Step step) const;
  void step_align();
  void step_subsample();
  void step_thresholds();
  void step_tiers();
  void step_grid();
  void step_extract();
  void step_surface();

  std::filesystem::path decision_file(std::string_view name) const;
  /// Writes a decision; returns true if its bytes changed.
  bool write_decision(std::string_view name, const nlohmann::json& value);
  bool erase_decision(std::string_view name);
  std::optional<nlohmann::json> read_decision(std::string_view name) const;

  SessionOptions options_;
  std::unique_ptr<SliceStack> stack_;
  ScanLayout layout_;
  std::optional<SubsampledVolume> subsampled_;
};

}  // namespace ctpack

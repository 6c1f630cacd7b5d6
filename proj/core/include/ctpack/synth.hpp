#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctpack/alignment.hpp"
#include "ctpack/layout.hpp"
#include "ctpack/mesh.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {

struct IntensityClass {
  double mean = 0.0;
  double sigma = 0.0;
};

struct SynthTierSpec {
  std::size_t rows = 3;
  std::size_t cols = 4;
  std::vector<std::pair<int, int>> empties;  // 1-based (row, col)
  double twist_deg = 0.0;                    // tier grid rotation inside the package
};

/// A packed scan: square package centred in the slice, tiers stacked in z and
/// separated by a thin cardboard sheet, each tier a grid of divider walls with
/// one ellipsoidal object per occupied cell.
struct SceneSpec {
  std::string scan_id = "SYN1";
  std::size_t width = 600;
  std::size_t height = 600;
  std::size_t depth = 800;
  std::vector<SynthTierSpec> tiers;
  double package_size = 440.0;  // side of the package square, voxels
  double wall_thickness = 3.0;
  std::size_t sheet_thickness = 2;
  std::size_t margin_bottom = 20;
  std::size_t margin_top = 20;
  double global_rotation_deg = 3.7;
  IntensityClass air{4000.0, 400.0};
  IntensityClass sheet{5000.0, 400.0};  // cardboard between tiers, close to air
  IntensityClass divider{12000.0, 600.0};
  IntensityClass object{26000.0, 1500.0};
  double offset = 0.0;  // added to every class mean
  // ellipsoid semi-axis ranges (voxels), drawn per object
  std::array<double, 2> semi_x{28.0, 40.0};
  std::array<double, 2> semi_y{35.0, 55.0};
  std::array<double, 2> semi_z{40.0, 55.0};
  double perturbation = 0.08;  // relative amplitude of the low-frequency surface wobble
  double voxel_pitch_um = 50.0;
  std::uint64_t seed = 1;
  std::string format = "tiff";  // or "png"
  std::size_t workers = 0;      // 0 = hardware concurrency

  /// Throws SpecInvalid with the reason.
  void validate() const;
};

/// The acceptance scene: 600 x 600 x 800, three 3 x 4 tiers with two empty
/// cells each, twists in [-8, 8] degrees and a global offset in [0, 20000]
/// drawn from `seed`.
SceneSpec default_scene(std::uint64_t seed = 1);

/// default_scene geometry shrunk in x/y to `size` pixels, with `n_tiers`
/// tiers of the default height (depth follows from the tier count).
SceneSpec small_scene(std::size_t n_tiers, std::uint64_t seed = 1, std::size_t size = 240);

struct TruthObject {
  std::string id;
  int tier = 0;
  int row = 0;
  int col = 0;
  std::array<double, 3> center{};      // tier frame, voxel index coordinates
  std::array<double, 3> semi_axes{};
  BoxRange extent;                     // emitted voxels, scan coordinates
  std::array<double, 3> centroid{};    // mean of emitted voxel indices
  std::uint64_t voxel_count = 0;
};

struct TruthTier {
  int tier = 0;
  std::size_t z_start = 0;  // full-res slices, half-open
  std::size_t z_stop = 0;
  double twist_deg = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> row_walls;  // wall centre lines, tier frame y (index coordinates)
  std::vector<double> col_walls;  // tier frame x
};

struct GroundTruth {
  std::string scan_id;
  std::size_t width = 0, height = 0, depth = 0;
  double global_rotation_deg = 0.0;
  double voxel_pitch_um = 0.0;
  double offset = 0.0;
  double wall_thickness = 0.0;
  ThresholdSet thresholds;
  AlignmentParams alignment;       // rotation and crop that square the package up
  std::vector<double> gap_centers;  // full-res z of each cardboard sheet centre
  std::vector<TruthTier> tiers;
  std::vector<TruthObject> objects;

  [[nodiscard]] const TruthObject& object(const std::string& id) const;  // UnknownIdentifier
  [[nodiscard]] bool has_object(const std::string& id) const;

  /// Scan index coordinates to the tier frame (undoes global rotation and twist).
  [[nodiscard]] Point2 to_tier_frame(int tier, Point2 scan_xy) const;

  /// True if the scan-coordinate point lies inside the object's divider cell
  /// (between its walls, within its tier's z range).
  [[nodiscard]] bool cell_contains(const std::string& id, Vec3 scan_point) const;

  /// Wall centre lines of a tier expressed as continuous coordinates of the
  /// subsampled, rotation-corrected tier image for the given subsample size.
  [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> subsampled_walls(
      int tier, std::size_t size = kSubsampledSize) const;

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
  static GroundTruth load(const std::filesystem::path& file);
};

/// Paths produced by generate().
struct SynthOutput {
  std::filesystem::path slice_dir;
  std::filesystem::path layout_csv;
  std::filesystem::path truth_json;
  GroundTruth truth;
};

/// Writes `out_dir/slices/slice_NNNN.{tif,png}` plus scan.json,
/// `out_dir/layout.csv` and `out_dir/truth.json`. Deterministic under the seed
/// regardless of worker count.
SynthOutput generate(const SceneSpec& spec, const std::filesystem::path& out_dir);

/// Layout CSV matching the scene (identifiers in tier/row/col order).
ScanLayout scene_layout(const SceneSpec& spec);

/// Slice z (0-based) exactly as generate() writes it.
Slice16 render_slice(const SceneSpec& spec, std::size_t z);

// ---------------------------------------------------------------------------
// Scoring

struct ObjectScore {
  std::string id;
  bool contained = false;         // truth extent inside the box
  bool centroid_in_cell = false;  // box centre inside the truth cell
  double volume_ratio = 0.0;      // box voxels / truth extent voxels
};

struct ScoreReport {
  std::vector<ObjectScore> objects;
  std::size_t truth_objects = 0;
  std::size_t contained = 0;
  double recall = 0.0;  // contained / truth objects
  [[nodiscard]] bool perfect() const noexcept { return contained == truth_objects; }
  nlohmann::json to_json() const;
};

/// Compares boxes with the truth. Box ids absent from the truth raise
/// UnknownIdentifier; truth objects without a box count as misses.
ScoreReport score_boxes(const GroundTruth& truth, const std::vector<ObjectBox>& boxes);

}  // namespace ctpack

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctpack/alignment.hpp"
#include "ctpack/image.hpp"
#include "ctpack/layout.hpp"
#include "ctpack/peaks.hpp"
#include "ctpack/subsample.hpp"

namespace ctpack {

// ---------------------------------------------------------------------------
// Thresholds and histogram

/// Voxel-value ranges picked by the operator: the divider/cardboard range and
/// the start of the object range. Objects extend to +infinity by default.
struct ThresholdSet {
  double a_divider = 0.0;
  double b_divider = 0.0;
  double a_object = 0.0;
  double b_object = std::numeric_limits<double>::infinity();

  /// Throws InvalidArgument unless a_divider < b_divider <= a_object < b_object.
  void validate() const;
  [[nodiscard]] ThresholdSet shifted(double offset) const;

  bool operator==(const ThresholdSet&) const = default;
};

struct Histogram {
  std::vector<double> edges;          // bins + 1 edges spanning [min, max]
  std::vector<std::uint64_t> counts;  // bins entries
};

inline constexpr std::size_t kHistogramBins = 500;

Histogram histogram(std::span<const double> values, std::size_t bins = kHistogramBins);
Histogram histogram(const Volume3D<double>& volume, std::size_t bins = kHistogramBins);

// ---------------------------------------------------------------------------
// Vertical segmentation into tiers

/// Mean voxel value of every z-plane.
std::vector<double> z_profile(const Volume3D<double>& volume);

/// Half-open range of subsampled z-planes belonging to one tier.
struct TierSlab {
  std::size_t z_start = 0;
  std::size_t z_stop = 0;

  [[nodiscard]] std::size_t depth() const noexcept { return z_stop - z_start; }
  bool operator==(const TierSlab&) const = default;
};

struct TierDetection {
  std::vector<Peak> candidates;  // every peak of -D passing the filters
  std::vector<std::size_t> detected_cuts;
  std::vector<std::size_t> cuts;  // final cuts: detected, or the ratified override
  std::vector<TierSlab> slabs;    // bottom tier first
  bool ratified = false;
};

inline constexpr double kTierMinWidth = 10.0;

/// Finds tier boundaries as peaks of the negated z-profile and keeps the
/// n_tiers - 1 most prominent. A supplied override replaces the detected cuts
/// (and skips InsufficientPeaks); the candidates are still reported.
TierDetection detect_tier_boundaries(std::span<const double> profile, std::size_t n_tiers,
                                     double min_width = kTierMinWidth,
                                     const std::optional<std::vector<std::size_t>>& override_cuts = std::nullopt);

std::vector<TierSlab> slabs_from_cuts(std::span<const std::size_t> cuts, std::size_t depth);

// ---------------------------------------------------------------------------
// Divider detection

/// score(i,j) = #{k : a_div <= V_ijk <= b_div} - #{k : a_obj <= V_ijk <= b_obj}
/// over the slab; mask keeps score where it exceeds 0.75 * max(score).
struct DividerImage {
  Image2D<double> score;
  Image2D<double> mask;
};

inline constexpr double kDividerMaskFraction = 0.75;

DividerImage divider_image(const Volume3D<double>& volume, TierSlab slab, const ThresholdSet& thresholds);

// ---------------------------------------------------------------------------
// Automatic tier rotation

/// Ratio of horizontal + vertical detail to diagonal detail of the mask
/// rotated by `angle_deg`, using absolute 2x2 responses.
double rotation_objective(const Image2D<double>& mask, double angle_deg);

struct RotationSweep {
  std::vector<double> angles;
  std::vector<double> objective;
  std::vector<double> smoothed;
  double best_sample_deg = 0.0;
  double angle_deg = 0.0;  // correction: rotating the mask by this aligns it
};

struct RotationOptions {
  double max_angle_deg = 10.0;
  double step_deg = 0.1;
  std::size_t smooth_window = 5;
  double fit_half_width_deg = 0.3;
  // Gaussian blur (pixels) applied to the mask before the sweep. Thin lines
  // otherwise let bilinear resampling blur dominate the objective, which then
  // peaks near 0 whatever the true angle. 0 disables.
  double presmooth_sigma = 5.0;
};

/// Separable Gaussian blur, kernel truncated at 3 sigma, zero outside the image.
Image2D<double> gaussian_blur(const Image2D<double>& image, double sigma);

RotationSweep auto_rotate(const Image2D<double>& mask, const RotationOptions& options = {});

// ---------------------------------------------------------------------------
// Grid segmentation

enum class CutMode { Walls, Interior, Ratified };

std::string_view to_string(CutMode mode) noexcept;
CutMode cut_mode_from_string(std::string_view name);

/// Cut lines in continuous coordinates of the rotated tier mask (pixel i
/// covers [i, i+1)). Cell (r, c) spans row_cuts[r]..row_cuts[r+1] in y and
/// col_cuts[c]..col_cuts[c+1] in x.
struct GridCuts {
  std::vector<double> row_cuts;
  std::vector<double> col_cuts;
  double rotation_deg = 0.0;
  CutMode row_mode = CutMode::Walls;
  CutMode col_mode = CutMode::Walls;
  std::vector<double> row_candidates;
  std::vector<double> col_candidates;

  bool operator==(const GridCuts&) const = default;
};

struct GridOverride {
  std::optional<std::vector<double>> row_cuts;
  std::optional<std::vector<double>> col_cuts;
};

/// Sums the rotated mask along each axis and picks divider lines: n+1 peaks
/// (package walls included) when present, otherwise exactly n-1 interior
/// peaks with the image bounds as the outer cuts.
GridCuts grid_segment(const Image2D<double>& rotated_mask, std::size_t n_rows, std::size_t n_cols,
                      double rotation_deg = 0.0, const GridOverride& override_cuts = {});

std::vector<double> row_projection(const Image2D<double>& image);
std::vector<double> col_projection(const Image2D<double>& image);

// ---------------------------------------------------------------------------
// Full-resolution boxes

/// Half-open voxel ranges in original-scan coordinates.
struct BoxRange {
  std::size_t x0 = 0, x1 = 0;
  std::size_t y0 = 0, y1 = 0;
  std::size_t z0 = 0, z1 = 0;

  [[nodiscard]] std::size_t nx() const noexcept { return x1 - x0; }
  [[nodiscard]] std::size_t ny() const noexcept { return y1 - y0; }
  [[nodiscard]] std::size_t nz() const noexcept { return z1 - z0; }
  [[nodiscard]] std::size_t voxels() const noexcept { return nx() * ny() * nz(); }
  [[nodiscard]] bool contains(const BoxRange& inner) const noexcept {
    return x0 <= inner.x0 && inner.x1 <= x1 && y0 <= inner.y0 && inner.y1 <= y1 && z0 <= inner.z0 &&
           inner.z1 <= z1;
  }
  bool operator==(const BoxRange&) const = default;
};

/// Everything needed to map subsampled coordinates back to the scan.
struct ScanGeometry {
  AlignmentParams alignment;
  double scale_x = 1.0;
  double scale_y = 1.0;
  std::size_t z_factor = kZFactor;
  std::size_t subsampled_size = kSubsampledSize;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t depth = 0;

  static ScanGeometry from(const SubsampledVolume& volume);
  bool operator==(const ScanGeometry&) const = default;
};

struct ObjectBox {
  std::string id;
  int tier = 0;
  int row = 0;  // 1-based
  int col = 0;
  BoxRange box;       // padded and clamped
  BoxRange unpadded;  // clamped envelope before padding
  // provenance
  double cell_x0 = 0, cell_x1 = 0, cell_y0 = 0, cell_y1 = 0;  // rotated-mask cell
  TierSlab slab;
  double tier_rotation_deg = 0.0;
  double pad = 0.0;
  ScanGeometry geometry;

  bool operator==(const ObjectBox&) const = default;
};

inline constexpr double kDefaultPad = 3.0;

/// Maps every occupied cell of a tier back through the tier rotation, the
/// x/y rescale, the crop offset and the alignment rotation, takes the
/// axis-aligned envelope, pads it by `pad` subsampled units and clamps it
/// to the scan. Boxes of neighbouring cells may overlap.
std::vector<ObjectBox> boxes_to_fullres(const GridCuts& cuts, TierSlab slab, const TierLayout& tier,
                                        const ScanGeometry& geometry, double pad = kDefaultPad);

}  // namespace ctpack

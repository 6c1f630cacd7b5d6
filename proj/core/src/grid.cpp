#include <algorithm>
#include <cmath>

#include "ctpack/error.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {
namespace {

constexpr double kGridMinWidth = 1.0;

std::vector<double> validated_override(const std::vector<double>& cuts, std::size_t n, std::size_t size,
                                       const char* axis) {
  if (cuts.size() != n + 1)
    fail(Errc::InvalidArgument, std::string(axis) + ": expected " + std::to_string(n + 1) + " cuts, have " +
                                    std::to_string(cuts.size()));
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (!(cuts[i] >= 0.0 && cuts[i] <= static_cast<double>(size)) || (i > 0 && !(cuts[i] > cuts[i - 1])))
      fail(Errc::InvalidArgument, std::string(axis) + ": cuts must be strictly increasing within [0, " +
                                      std::to_string(size) + "]");
  }
  return cuts;
}

struct AxisCuts {
  std::vector<double> cuts;
  std::vector<double> candidates;
  CutMode mode = CutMode::Walls;
};

AxisCuts segment_axis(const std::vector<double>& projection, std::size_t n, const char* axis,
                      const std::optional<std::vector<double>>& override_cuts) {
  AxisCuts out;
  PeakOptions options;
  options.min_width = kGridMinWidth;
  const std::vector<Peak> peaks = find_peaks(projection, options);
  for (const Peak& p : peaks) out.candidates.push_back(p.position + 0.5);

  if (override_cuts) {
    out.cuts = validated_override(*override_cuts, n, projection.size(), axis);
    out.mode = CutMode::Ratified;
    return out;
  }
  if (peaks.size() >= n + 1) {
    for (const Peak& p : strongest_peaks(peaks, n + 1)) out.cuts.push_back(p.position + 0.5);
    out.mode = CutMode::Walls;
  } else if (peaks.size() == n - 1) {
    out.cuts.push_back(0.0);
    for (const Peak& p : peaks) out.cuts.push_back(p.position + 0.5);
    out.cuts.push_back(static_cast<double>(projection.size()));
    out.mode = CutMode::Interior;
  } else {
    fail(Errc::PeakCountMismatch, std::string(axis) + ": found " + std::to_string(peaks.size()) + " peak(s), expected " +
                                      std::to_string(n + 1) + " (with walls) or " + std::to_string(n - 1) +
                                      " (interior only)");
  }
  return out;
}

}  // namespace

std::string_view to_string(CutMode mode) noexcept {
  switch (mode) {
    case CutMode::Walls: return "walls";
    case CutMode::Interior: return "interior";
    case CutMode::Ratified: return "ratified";
  }
  return "walls";
}

CutMode cut_mode_from_string(std::string_view name) {
  if (name == "walls") return CutMode::Walls;
  if (name == "interior") return CutMode::Interior;
  if (name == "ratified") return CutMode::Ratified;
  fail(Errc::ParseError, "unknown cut mode '" + std::string(name) + "'");
}

std::vector<double> row_projection(const Image2D<double>& image) {
  std::vector<double> p(image.height(), 0.0);
  for (std::size_t y = 0; y < image.height(); ++y)
    for (double v : image.row(y)) p[y] += v;
  return p;
}

std::vector<double> col_projection(const Image2D<double>& image) {
  std::vector<double> p(image.width(), 0.0);
  for (std::size_t y = 0; y < image.height(); ++y) {
    const auto row = image.row(y);
    for (std::size_t x = 0; x < row.size(); ++x) p[x] += row[x];
  }
  return p;
}

GridCuts grid_segment(const Image2D<double>& rotated_mask, std::size_t n_rows, std::size_t n_cols,
                      double rotation_deg, const GridOverride& override_cuts) {
  if (n_rows == 0 || n_cols == 0) fail(Errc::InvalidArgument, "grid needs at least one row and column");
  AxisCuts rows = segment_axis(row_projection(rotated_mask), n_rows, "rows", override_cuts.row_cuts);
  AxisCuts cols = segment_axis(col_projection(rotated_mask), n_cols, "columns", override_cuts.col_cuts);
  GridCuts out;
  out.row_cuts = std::move(rows.cuts);
  out.col_cuts = std::move(cols.cuts);
  out.row_mode = rows.mode;
  out.col_mode = cols.mode;
  out.row_candidates = std::move(rows.candidates);
  out.col_candidates = std::move(cols.candidates);
  out.rotation_deg = rotation_deg;
  return out;
}

}  // namespace ctpack

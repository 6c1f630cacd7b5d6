#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ctpack/error.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {
namespace {

std::size_t clamp_index(double v, std::size_t hi) {
  if (v <= 0.0) return 0;
  if (v >= static_cast<double>(hi)) return hi;
  return static_cast<std::size_t>(v);
}

}  // namespace

ScanGeometry ScanGeometry::from(const SubsampledVolume& volume) {
  ScanGeometry g;
  g.alignment = volume.alignment;
  g.scale_x = volume.scale_x;
  g.scale_y = volume.scale_y;
  g.z_factor = volume.z_factor;
  g.subsampled_size = volume.data.nx();
  g.width = volume.source_width;
  g.height = volume.source_height;
  g.depth = volume.source_depth;
  return g;
}

std::vector<ObjectBox> boxes_to_fullres(const GridCuts& cuts, TierSlab slab, const TierLayout& tier,
                                        const ScanGeometry& g, double pad) {
  if (cuts.row_cuts.size() != tier.n_rows() + 1 || cuts.col_cuts.size() != tier.n_cols() + 1)
    fail(Errc::InvalidArgument, "grid cuts do not match the tier layout (" + std::to_string(tier.n_rows()) + "x" +
                                    std::to_string(tier.n_cols()) + ")");
  if (pad < 0.0) fail(Errc::InvalidArgument, "padding must be non-negative");

  // Continuous coordinates: pixel i covers [i, i+1), so the rotation centre
  // of an n-pixel axis sits at n/2.
  const double sub = static_cast<double>(g.subsampled_size);
  const Point2 sub_center{sub / 2.0, sub / 2.0};
  const Point2 scan_center{static_cast<double>(g.width) / 2.0, static_cast<double>(g.height) / 2.0};

  auto to_scan = [&](Point2 p) {
    p = rotate_point(p, -cuts.rotation_deg, sub_center);
    p = {p.x * g.scale_x + static_cast<double>(g.alignment.cols.start),
         p.y * g.scale_y + static_cast<double>(g.alignment.rows.start)};
    return rotate_point(p, -g.alignment.angle_deg, scan_center);
  };

  const double zf = static_cast<double>(g.z_factor);
  std::vector<ObjectBox> boxes;
  for (std::size_t r = 0; r < tier.n_rows(); ++r) {
    for (std::size_t c = 0; c < tier.n_cols(); ++c) {
      const CellEntry& cell = tier.rows[r][c];
      if (cell.is_empty()) continue;

      const double cx0 = cuts.col_cuts[c], cx1 = cuts.col_cuts[c + 1];
      const double cy0 = cuts.row_cuts[r], cy1 = cuts.row_cuts[r + 1];
      double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
      double ymin = xmin, ymax = -xmin;
      for (const Point2 corner : std::array<Point2, 4>{{{cx0, cy0}, {cx1, cy0}, {cx1, cy1}, {cx0, cy1}}}) {
        const Point2 q = to_scan(corner);
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
      }
      const double zmin = static_cast<double>(slab.z_start) * zf;
      const double zmax = static_cast<double>(slab.z_stop) * zf;

      ObjectBox box;
      box.id = cell.id();
      box.tier = tier.tier_index;
      box.row = static_cast<int>(r) + 1;
      box.col = static_cast<int>(c) + 1;
      box.unpadded = {clamp_index(std::floor(xmin), g.width), clamp_index(std::ceil(xmax), g.width),
                      clamp_index(std::floor(ymin), g.height), clamp_index(std::ceil(ymax), g.height),
                      clamp_index(std::floor(zmin), g.depth), clamp_index(std::ceil(zmax), g.depth)};
      const double px = pad * g.scale_x, py = pad * g.scale_y, pz = pad * zf;
      box.box = {clamp_index(std::floor(xmin - px), g.width), clamp_index(std::ceil(xmax + px), g.width),
                 clamp_index(std::floor(ymin - py), g.height), clamp_index(std::ceil(ymax + py), g.height),
                 clamp_index(std::floor(zmin - pz), g.depth), clamp_index(std::ceil(zmax + pz), g.depth)};
      if (box.box.voxels() == 0)
        fail(Errc::OutOfBoundsAfterClamp, box.id + ": box is empty after clamping to the scan");
      box.cell_x0 = cx0;
      box.cell_x1 = cx1;
      box.cell_y0 = cy0;
      box.cell_y1 = cy1;
      box.slab = slab;
      box.tier_rotation_deg = cuts.rotation_deg;
      box.pad = pad;
      box.geometry = g;
      boxes.push_back(std::move(box));
    }
  }
  return boxes;
}

}  // namespace ctpack

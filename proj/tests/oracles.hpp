#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ctpack/alignment.hpp"
#include "ctpack/image.hpp"

// Independent reference implementations used by the unit and acceptance tests.
namespace test {

using ctpack::AlignmentParams;
using ctpack::Slice16;
using ctpack::Volume3D;

// Oracle for the aligned view: bilinear sampling written out directly.
inline double bilinear(const Slice16& s, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const double xi = fx + dx, yi = fy + dy;
      if (xi < 0 || yi < 0 || xi >= static_cast<double>(s.width()) || yi >= static_cast<double>(s.height())) continue;
      const double w = (dx ? x - fx : 1.0 - (x - fx)) * (dy ? y - fy : 1.0 - (y - fy));
      acc += w * s(static_cast<std::size_t>(xi), static_cast<std::size_t>(yi));
    }
  return acc;
}

inline std::vector<double> aligned_oracle(const Slice16& s, const AlignmentParams& p) {
  const double cx = (static_cast<double>(s.width()) - 1) / 2, cy = (static_cast<double>(s.height()) - 1) / 2;
  const double t = p.angle_deg * 3.14159265358979323846 / 180.0;
  std::vector<double> out;
  for (std::size_t r = p.rows.start; r < p.rows.stop; ++r)
    for (std::size_t c = p.cols.start; c < p.cols.stop; ++c) {
      // content at q is displayed at R(a) q, so output p reads q = R(-a) p
      const double dx = static_cast<double>(c) - cx, dy = static_cast<double>(r) - cy;
      const double qx = cx + dx * std::cos(-t) + dy * std::sin(-t);
      const double qy = cy - dx * std::sin(-t) + dy * std::cos(-t);
      out.push_back(bilinear(s, qx, qy));
    }
  return out;
}

// 1-D overlap fraction of source pixel j with output cell i.
inline double overlap(std::size_t j, std::size_t i, double scale) {
  const double lo = std::max(static_cast<double>(j), static_cast<double>(i) * scale);
  const double hi = std::min(static_cast<double>(j + 1), static_cast<double>(i + 1) * scale);
  return std::max(0.0, hi - lo);
}

// Materialise every aligned slice, area-average to n x n, average z batches.
inline Volume3D<double> brute_force_subsample(const std::vector<Slice16>& slices, const AlignmentParams& p, std::size_t n,
                                              std::size_t zf) {
  const std::size_t cw = p.cols.size(), ch = p.rows.size();
  const double sx = static_cast<double>(cw) / static_cast<double>(n);
  const double sy = static_cast<double>(ch) / static_cast<double>(n);
  const std::size_t depth = (slices.size() + zf - 1) / zf;
  Volume3D<double> out(n, n, depth);
  std::vector<std::size_t> counts(depth, 0);
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const std::vector<double> a = aligned_oracle(slices[k], p);
    for (std::size_t oy = 0; oy < n; ++oy)
      for (std::size_t ox = 0; ox < n; ++ox) {
        double acc = 0.0;
        for (std::size_t y = 0; y < ch; ++y) {
          const double wy = overlap(y, oy, sy);
          if (wy == 0.0) continue;
          for (std::size_t x = 0; x < cw; ++x) {
            const double wx = overlap(x, ox, sx);
            if (wx != 0.0) acc += wx * wy * a[y * cw + x];
          }
        }
        out(ox, oy, k / zf) += acc / (sx * sy);
      }
    ++counts[k / zf];
  }
  for (std::size_t z = 0; z < depth; ++z)
    for (double& v : out.plane(z)) v /= static_cast<double>(counts[z]);
  return out;
}

/// Largest |a - b| / max(1, |b|); infinite when the shapes differ.
inline double max_relative_error(const Volume3D<double>& a, const Volume3D<double>& b) {
  if (a.nx() != b.nx() || a.ny() != b.ny() || a.nz() != b.nz()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.voxels()[i], y = b.voxels()[i];
    worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
  }
  return worst;
}


}  // namespace test

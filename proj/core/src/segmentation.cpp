#include "ctpack/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "ctpack/error.hpp"

namespace ctpack {

void ThresholdSet::validate() const {
  if (!(std::isfinite(a_divider) && std::isfinite(b_divider) && std::isfinite(a_object)))
    fail(Errc::InvalidArgument, "thresholds must be finite (b_object may be +inf)");
  if (!(a_divider < b_divider && b_divider <= a_object && a_object < b_object))
    fail(Errc::InvalidArgument, "thresholds must satisfy a_divider < b_divider <= a_object < b_object");
}

ThresholdSet ThresholdSet::shifted(double offset) const {
  return {a_divider + offset, b_divider + offset, a_object + offset, b_object + offset};
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) fail(Errc::InvalidArgument, "histogram needs at least one bin");
  if (values.empty()) fail(Errc::InvalidArgument, "histogram of an empty volume");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  const double span = hi - lo;
  for (double v : values) {
    std::size_t bin = 0;
    if (span > 0.0) {
      bin = static_cast<std::size_t>((v - lo) / span * static_cast<double>(bins));
      bin = std::min(bin, bins - 1);
    }
    ++h.counts[bin];
  }
  return h;
}

Histogram histogram(const Volume3D<double>& volume, std::size_t bins) { return histogram(volume.voxels(), bins); }

std::vector<double> z_profile(const Volume3D<double>& volume) {
  std::vector<double> d(volume.nz(), 0.0);
  const double n = static_cast<double>(volume.nx() * volume.ny());
  for (std::size_t z = 0; z < volume.nz(); ++z) {
    double sum = 0.0;
    for (double v : volume.plane(z)) sum += v;
    d[z] = sum / n;
  }
  return d;
}

std::vector<TierSlab> slabs_from_cuts(std::span<const std::size_t> cuts, std::size_t depth) {
  std::vector<TierSlab> slabs;
  std::size_t start = 0;
  for (std::size_t cut : cuts) {
    if (cut <= start || cut >= depth)
      fail(Errc::InvalidArgument, "tier cuts must be strictly increasing inside (0, " + std::to_string(depth) + ")");
    slabs.push_back({start, cut});
    start = cut;
  }
  slabs.push_back({start, depth});
  return slabs;
}

TierDetection detect_tier_boundaries(std::span<const double> profile, std::size_t n_tiers, double min_width,
                                     const std::optional<std::vector<std::size_t>>& override_cuts) {
  if (n_tiers == 0) fail(Errc::InvalidArgument, "n_tiers must be >= 1");
  if (profile.empty()) fail(Errc::InvalidArgument, "empty z-profile");

  TierDetection out;
  std::vector<double> negated(profile.size());
  std::transform(profile.begin(), profile.end(), negated.begin(), [](double v) { return -v; });
  PeakOptions options;
  options.min_width = min_width;
  out.candidates = find_peaks(negated, options);

  // One cut per gap: a candidate whose half-prominence interval overlaps a
  // stronger one sits in the same gap (e.g. on the other side of a cardboard
  // sheet) and is skipped.
  std::vector<Peak> distinct;
  {
    std::vector<Peak> ranked = out.candidates;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    for (const Peak& p : ranked) {
      const bool overlaps = std::any_of(distinct.begin(), distinct.end(), [&](const Peak& q) {
        return p.left_ip <= q.right_ip && q.left_ip <= p.right_ip;
      });
      if (!overlaps) distinct.push_back(p);
    }
  }

  const std::size_t needed = n_tiers - 1;
  if (distinct.size() >= needed) {
    for (const Peak& p : strongest_peaks(distinct, needed)) {
      // The half-prominence interval centre is robust to the small dip a
      // cardboard sheet puts in the middle of a tier gap.
      const double boundary = p.center() + 0.5;
      out.detected_cuts.push_back(static_cast<std::size_t>(std::lround(std::max(boundary, 0.0))));
    }
  }

  if (override_cuts) {
    if (override_cuts->size() != needed)
      fail(Errc::InvalidArgument, "expected " + std::to_string(needed) + " tier cuts, have " +
                                      std::to_string(override_cuts->size()));
    out.cuts = *override_cuts;
    out.ratified = true;
  } else {
    if (distinct.size() < needed)
      fail(Errc::InsufficientPeaks, "found " + std::to_string(distinct.size()) + " tier boundary peak(s), need " +
                                        std::to_string(needed));
    out.cuts = out.detected_cuts;
  }
  out.slabs = slabs_from_cuts(out.cuts, profile.size());
  return out;
}

DividerImage divider_image(const Volume3D<double>& volume, TierSlab slab, const ThresholdSet& t) {
  if (slab.z_start >= slab.z_stop || slab.z_stop > volume.nz())
    fail(Errc::InvalidArgument, "tier slab outside the volume");
  const std::size_t nx = volume.nx();
  const std::size_t ny = volume.ny();
  DividerImage out{Image2D<double>(nx, ny), Image2D<double>(nx, ny)};
  for (std::size_t z = slab.z_start; z < slab.z_stop; ++z) {
    const auto plane = volume.plane(z);
    auto score = out.score.pixels();
    for (std::size_t i = 0; i < plane.size(); ++i) {
      const double v = plane[i];
      if (t.a_divider <= v && v <= t.b_divider) score[i] += 1.0;
      if (t.a_object <= v && v <= t.b_object) score[i] -= 1.0;
    }
  }
  const auto score = out.score.pixels();
  const double peak = *std::max_element(score.begin(), score.end());
  if (!(peak > 0.0)) fail(Errc::DegenerateMask, "no column has divider signal (max score " + std::to_string(peak) + ")");
  const double cutoff = kDividerMaskFraction * peak;
  auto mask = out.mask.pixels();
  for (std::size_t i = 0; i < score.size(); ++i) mask[i] = score[i] > cutoff ? score[i] : 0.0;
  return out;
}

}  // namespace ctpack

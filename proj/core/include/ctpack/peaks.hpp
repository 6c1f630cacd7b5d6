#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctpack {

/// A local maximum of a 1-D signal with its topographic prominence and its
/// width measured at `rel_height` of the prominence below the summit.
struct Peak {
  std::size_t index = 0;     // sample index (middle of a flat top)
  double position = 0.0;     // sub-sample summit from a 3-point parabola
  double height = 0.0;
  double prominence = 0.0;
  std::size_t left_base = 0;
  std::size_t right_base = 0;
  double left_ip = 0.0;      // interpolated crossing of the width line
  double right_ip = 0.0;
  double width = 0.0;

  /// Midpoint of the width interval.
  [[nodiscard]] double center() const noexcept { return 0.5 * (left_ip + right_ip); }
};

struct PeakOptions {
  /// Minimum prominence as a fraction of (max - min) of the signal.
  double min_prominence_fraction = 0.1;
  /// Minimum width in samples, measured at rel_height.
  double min_width = 1.0;
  double rel_height = 0.5;
};

/// All local maxima passing the prominence and width filters, in index order.
std::vector<Peak> find_peaks(std::span<const double> signal, const PeakOptions& options = {});

/// The `count` most prominent peaks (ties go to the leftmost), returned in
/// index order.
std::vector<Peak> strongest_peaks(std::vector<Peak> peaks, std::size_t count);

}  // namespace ctpack

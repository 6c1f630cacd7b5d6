#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "ctpack/image.hpp"

namespace ctpack {

/// Half-open pixel index range [start, stop).
struct PixelRange {
  std::size_t start = 0;
  std::size_t stop = 0;

  [[nodiscard]] std::size_t size() const noexcept { return stop - start; }
  bool operator==(const PixelRange&) const = default;
};

/// The five hand-picked values that align the overhead view of a scan with
/// its layout CSV: a rotation about the slice centre followed by a crop.
struct AlignmentParams {
  double angle_deg = 0.0;  // counterclockwise as displayed (image y points down)
  PixelRange rows;         // y range after rotation
  PixelRange cols;         // x range after rotation

  /// Throws RangeOutOfBounds unless 0 <= start < stop <= dimension on both axes.
  void validate(std::size_t width, std::size_t height) const;

  static AlignmentParams identity(std::size_t width, std::size_t height) {
    return {0.0, {0, height}, {0, width}};
  }

  bool operator==(const AlignmentParams&) const = default;
};

/// Text form: `angle row_start row_stop col_start col_stop`.
AlignmentParams parse_alignment(std::string_view text);
AlignmentParams load_alignment(const std::filesystem::path& file);
std::string format_alignment(const AlignmentParams& params);
void save_alignment(const std::filesystem::path& file, const AlignmentParams& params);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kPi = 3.14159265358979323846;

/// Rotates `p` about `center` by `angle_deg`, counterclockwise as displayed
/// with y pointing down. Rotating by +a then -a is the identity.
inline Point2 rotate_point(Point2 p, double angle_deg, Point2 center) noexcept {
  const double t = angle_deg * kPi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return {center.x + dx * c + dy * s, center.y - dx * s + dy * c};
}

/// Centre of a width x height image in pixel-index coordinates (pixel i has
/// its centre at i).
inline Point2 image_center(std::size_t width, std::size_t height) noexcept {
  return {(static_cast<double>(width) - 1.0) / 2.0, (static_cast<double>(height) - 1.0) / 2.0};
}

/// Bilinear sample at pixel-index coordinates; taps outside the image read 0.
template <typename T>
double sample_bilinear(const Image2D<T>& img, double x, double y) noexcept {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double fx = x - fx0;
  const double fy = y - fy0;
  const auto x0 = static_cast<long long>(fx0);
  const auto y0 = static_cast<long long>(fy0);
  const auto w = static_cast<long long>(img.width());
  const auto h = static_cast<long long>(img.height());
  auto at = [&](long long xi, long long yi) -> double {
    if (xi < 0 || yi < 0 || xi >= w || yi >= h) return 0.0;
    return static_cast<double>(img(static_cast<std::size_t>(xi), static_cast<std::size_t>(yi)));
  };
  return (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
         fy * ((1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
}

/// Same-size bilinear rotation about the image centre, zero fill.
template <typename T>
Image2D<double> rotate_image(const Image2D<T>& img, double angle_deg) {
  Image2D<double> out(img.width(), img.height());
  const Point2 center = image_center(img.width(), img.height());
  const double t = angle_deg * kPi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  for (std::size_t y = 0; y < img.height(); ++y) {
    const double dy = static_cast<double>(y) - center.y;
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double dx = static_cast<double>(x) - center.x;
      // inverse of rotate_point(., angle_deg)
      out(x, y) = sample_bilinear(img, center.x + dx * c - dy * s, center.y + dx * s + dy * c);
    }
  }
  return out;
}

/// Fills one row of the rotated-and-cropped view of `slice` (row index is
/// relative to the crop). Used by streaming consumers that never materialise
/// the whole aligned slice.
void aligned_row(const Slice16& slice, const AlignmentParams& params, std::size_t crop_row,
                 std::span<double> out);

/// Bilinear rotation by `params.angle_deg` about the slice centre (zero fill),
/// then crop to `params.rows` x `params.cols`.
Image2D<double> rotate_crop(const Slice16& slice, const AlignmentParams& params);

}  // namespace ctpack

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ctpack/error.hpp"
#include "ctpack/segmentation.hpp"

namespace ctpack {
namespace {

// Responses are only summed over 2x2 windows inside the disc that stays
// within the frame at every angle, so the zero-filled corners of a rotated
// image never contribute edges.
double window_radius(std::size_t width, std::size_t height) {
  return (static_cast<double>(std::min(width, height)) - 1.0) / 2.0 - 1.5;
}

double objective_of_rotated(const Image2D<double>& r, double epsilon) {
  const Point2 center = image_center(r.width(), r.height());
  const double radius = window_radius(r.width(), r.height());
  const double radius2 = radius * radius;
  double detail_hv = 0.0;
  double detail_diag = 0.0;
  for (std::size_t y = 0; y + 1 < r.height(); ++y) {
    const double cy = static_cast<double>(y) + 0.5 - center.y;
    const auto top = r.row(y);
    const auto bottom = r.row(y + 1);
    for (std::size_t x = 0; x + 1 < r.width(); ++x) {
      const double cx = static_cast<double>(x) + 0.5 - center.x;
      if (cx * cx + cy * cy > radius2) continue;
      const double a = top[x], b = top[x + 1], c = bottom[x], d = bottom[x + 1];
      detail_hv += std::abs(a - b + c - d) + std::abs(a + b - c - d);
      detail_diag += std::abs(a - b - c + d);
    }
  }
  return detail_hv / (detail_diag + epsilon);
}

double stabilizer(const Image2D<double>& mask) {
  double total = 0.0;
  for (double v : mask.pixels()) total += v;
  if (!(total > 0.0)) fail(Errc::DegenerateMask, "divider mask is empty");
  return 1e-9 * total;
}

}  // namespace

Image2D<double> gaussian_blur(const Image2D<double>& image, double sigma) {
  if (!(sigma > 0.0)) return image;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  Image2D<double> tmp(image.width(), image.height());
  Image2D<double> out(image.width(), image.height());
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = std::max(-radius, -x); i <= std::min(radius, w - 1 - x); ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * image(static_cast<std::size_t>(x + i), static_cast<std::size_t>(y));
      tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t i = std::max(-radius, -y); i <= std::min(radius, h - 1 - y); ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y + i));
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  return out;
}

double rotation_objective(const Image2D<double>& mask, double angle_deg) {
  const double eps = stabilizer(mask);
  return objective_of_rotated(rotate_image(mask, angle_deg), eps);
}

RotationSweep auto_rotate(const Image2D<double>& mask, const RotationOptions& options) {
  if (!(options.step_deg > 0.0) || !(options.max_angle_deg > 0.0))
    fail(Errc::InvalidArgument, "rotation sweep needs a positive range and step");
  const double eps = stabilizer(mask);
  const Image2D<double> source = gaussian_blur(mask, options.presmooth_sigma);

  RotationSweep sweep;
  const auto steps = static_cast<std::size_t>(std::lround(2.0 * options.max_angle_deg / options.step_deg));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double a = -options.max_angle_deg + static_cast<double>(k) * options.step_deg;
    sweep.angles.push_back(a);
    sweep.objective.push_back(objective_of_rotated(rotate_image(source, a), eps));
  }

  const std::size_t n = sweep.angles.size();
  const std::size_t half = options.smooth_window / 2;
  sweep.smoothed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += sweep.objective[j];
    sweep.smoothed[i] = sum / static_cast<double>(hi - lo + 1);
  }

  const auto [min_it, max_it] = std::minmax_element(sweep.smoothed.begin(), sweep.smoothed.end());
  const double scale = std::max(std::abs(*max_it), std::numeric_limits<double>::min());
  if ((*max_it - *min_it) < 1e-9 * scale) fail(Errc::FlatObjective, "rotation objective does not vary with angle");

  const auto best = static_cast<std::size_t>(max_it - sweep.smoothed.begin());
  const double a_best = sweep.angles[best];
  sweep.best_sample_deg = a_best;

  // Least-squares parabola through the smoothed samples near the discrete
  // maximum, abscissa centred on it.
  std::array<double, 5> sx{};  // sums of u^0..u^4
  std::array<double, 3> sy{};  // sums of y*u^0..u^2
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sweep.angles[i] - a_best;
    if (std::abs(u) > options.fit_half_width_deg + 1e-9) continue;
    double p = 1.0;
    for (std::size_t k = 0; k < 5; ++k) {
      sx[k] += p;
      if (k < 3) sy[k] += p * sweep.smoothed[i];
      p *= u;
    }
  }
  // Solve [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] [c0 c1 c2]^T = [y0 y1 y2]^T by Cramer's rule.
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const double det = det3(sx[0], sx[1], sx[2], sx[1], sx[2], sx[3], sx[2], sx[3], sx[4]);
  double vertex = a_best;
  if (std::abs(det) > 0.0) {
    const double c1 = det3(sx[0], sy[0], sx[2], sx[1], sy[1], sx[3], sx[2], sy[2], sx[4]) / det;
    const double c2 = det3(sx[0], sx[1], sy[0], sx[1], sx[2], sy[1], sx[2], sx[3], sy[2]) / det;
    if (c2 < 0.0) {
      const double offset = -c1 / (2.0 * c2);
      vertex = a_best + std::clamp(offset, -options.fit_half_width_deg, options.fit_half_width_deg);
    }
  }
  sweep.angle_deg = std::clamp(vertex, -options.max_angle_deg, options.max_angle_deg);
  return sweep;
}

}  // namespace ctpack

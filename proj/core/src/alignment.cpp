#include "ctpack/alignment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "ctpack/error.hpp"

namespace ctpack {

void AlignmentParams::validate(std::size_t width, std::size_t height) const {
  if (!std::isfinite(angle_deg)) fail(Errc::RangeOutOfBounds, "angle is not finite");
  auto check = [](const PixelRange& r, std::size_t dim, const char* axis) {
    if (!(r.start < r.stop && r.stop <= dim))
      fail(Errc::RangeOutOfBounds, std::string(axis) + " range [" + std::to_string(r.start) + ", " +
                                       std::to_string(r.stop) + ") invalid for dimension " + std::to_string(dim));
  };
  check(rows, height, "row");
  check(cols, width, "column");
}

AlignmentParams parse_alignment(std::string_view text) {
  std::istringstream in{std::string(text)};
  AlignmentParams p;
  long long values[4];
  if (!(in >> p.angle_deg >> values[0] >> values[1] >> values[2] >> values[3]))
    fail(Errc::ParseError, "alignment needs 5 values: angle row_start row_stop col_start col_stop");
  std::string extra;
  if (in >> extra) fail(Errc::ParseError, "unexpected trailing token '" + extra + "' in alignment");
  for (long long v : values)
    if (v < 0) fail(Errc::RangeOutOfBounds, "negative crop index in alignment");
  p.rows = {static_cast<std::size_t>(values[0]), static_cast<std::size_t>(values[1])};
  p.cols = {static_cast<std::size_t>(values[2]), static_cast<std::size_t>(values[3])};
  return p;
}

AlignmentParams load_alignment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(Errc::IoError, "cannot open alignment file " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_alignment(buffer.str());
}

std::string format_alignment(const AlignmentParams& p) {
  char angle[64];
  auto [end, ec] = std::to_chars(angle, angle + sizeof(angle), p.angle_deg);
  (void)ec;
  std::ostringstream out;
  out << std::string_view(angle, static_cast<std::size_t>(end - angle)) << ' ' << p.rows.start << ' '
      << p.rows.stop << ' ' << p.cols.start << ' ' << p.cols.stop << '\n';
  return out.str();
}

void save_alignment(const std::filesystem::path& file, const AlignmentParams& params) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::WriteError, file.string());
  out << format_alignment(params);
}

void aligned_row(const Slice16& slice, const AlignmentParams& params, std::size_t crop_row,
                 std::span<double> out) {
  const std::size_t y = params.rows.start + crop_row;
  if (params.angle_deg == 0.0) {
    const auto src = slice.row(y);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = src[params.cols.start + c];
    return;
  }
  const double t = params.angle_deg * kPi / 180.0;
  const double cs = std::cos(t);
  const double sn = std::sin(t);
  const Point2 center = image_center(slice.width(), slice.height());
  const double dy = static_cast<double>(y) - center.y;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const double dx = static_cast<double>(params.cols.start + c) - center.x;
    // inverse of rotate_point(., angle)
    const double sx = center.x + dx * cs - dy * sn;
    const double sy = center.y + dx * sn + dy * cs;
    out[c] = sample_bilinear(slice, sx, sy);
  }
}

Image2D<double> rotate_crop(const Slice16& slice, const AlignmentParams& params) {
  params.validate(slice.width(), slice.height());
  Image2D<double> out(params.cols.size(), params.rows.size());
  for (std::size_t r = 0; r < out.height(); ++r) aligned_row(slice, params, r, out.row(r));
  return out;
}

}  // namespace ctpack

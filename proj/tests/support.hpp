#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "ctpack/alignment.hpp"
#include "ctpack/image.hpp"
#include "ctpack/slice_io.hpp"

namespace test {

/// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ctpack_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ctpack::Slice16 random_slice(std::size_t w, std::size_t h, std::uint64_t seed, int lo = 0, int hi = 65535) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(lo, hi);
  ctpack::Slice16 s(w, h);
  for (auto& v : s.pixels()) v = static_cast<std::uint16_t>(d(rng));
  return s;
}

/// Writes `depth` random slices named slice_00001.tif...
inline void write_random_stack(const std::filesystem::path& dir, std::size_t w, std::size_t h, std::size_t depth,
                               std::uint64_t seed, int lo = 0, int hi = 65535) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < depth; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%05zu.tif", k + 1);
    ctpack::write_slice_tiff(dir / name, random_slice(w, h, seed * 1000003 + k, lo, hi));
  }
}

/// Axis-aligned grid of 1-pixel-wide lines (n+1 per axis, walls included),
/// drawn with anti-aliasing after rotating the content by `angle_deg`
/// (counterclockwise as displayed), so the correction is -angle_deg.
inline ctpack::Image2D<double> grid_mask(std::size_t size, std::size_t rows, std::size_t cols, double angle_deg,
                                         double margin = 20.0, double half_width = 0.8, double value = 20.0) {
  ctpack::Image2D<double> img(size, size);
  const ctpack::Point2 c = ctpack::image_center(size, size);
  const double lo = margin, hi = static_cast<double>(size) - 1.0 - margin;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const ctpack::Point2 q = ctpack::rotate_point({static_cast<double>(x), static_cast<double>(y)}, -angle_deg, c);
      if (q.x < lo - 1 || q.x > hi + 1 || q.y < lo - 1 || q.y > hi + 1) continue;
      double best = 1e9;
      for (std::size_t k = 0; k <= cols; ++k)
        best = std::min(best, std::abs(q.x - (lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cols))));
      for (std::size_t k = 0; k <= rows; ++k)
        best = std::min(best, std::abs(q.y - (lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(rows))));
      const double cover = std::clamp(half_width + 0.5 - best, 0.0, 1.0);
      if (cover > 0.0) img(x, y) = value * cover;
    }
  }
  return img;
}

}  // namespace test

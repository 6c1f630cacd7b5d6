#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ctpack/memory.hpp"

namespace ctpack {

template <typename T>
using tracked_vector = std::vector<T, TrackingAllocator<T>>;

/// Row-major 2-D image; x indexes columns, y indexes rows.
template <typename T>
class Image2D {
 public:
  using value_type = T;

  Image2D() = default;
  Image2D(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] std::size_t bytes() const noexcept { return data_.size() * sizeof(T); }

  T& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }

  std::span<T> row(std::size_t y) noexcept { return {data_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const noexcept { return {data_.data() + y * width_, width_}; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const Image2D& other) const {
    return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  tracked_vector<T> data_;
};

/// Dense 3-D array stored slice-major: index = (z * ny + y) * nx + x.
template <typename T>
class Volume3D {
 public:
  using value_type = T;

  Volume3D() = default;
  Volume3D(std::size_t nx, std::size_t ny, std::size_t nz, T fill = T{})
      : nx_(nx), ny_(ny), nz_(nz), data_(nx * ny * nz, fill) {}

  [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
  [[nodiscard]] std::size_t ny() const noexcept { return ny_; }
  [[nodiscard]] std::size_t nz() const noexcept { return nz_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] std::size_t bytes() const noexcept { return data_.size() * sizeof(T); }

  T& operator()(std::size_t x, std::size_t y, std::size_t z) noexcept {
    return data_[(z * ny_ + y) * nx_ + x];
  }
  const T& operator()(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return data_[(z * ny_ + y) * nx_ + x];
  }

  std::span<T> plane(std::size_t z) noexcept { return {data_.data() + z * nx_ * ny_, nx_ * ny_}; }
  std::span<const T> plane(std::size_t z) const noexcept {
    return {data_.data() + z * nx_ * ny_, nx_ * ny_};
  }

  std::span<T> voxels() noexcept { return data_; }
  std::span<const T> voxels() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const Volume3D& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && nz_ == other.nz_ && data_ == other.data_;
  }

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::size_t nz_ = 0;
  tracked_vector<T> data_;
};

using Slice16 = Image2D<std::uint16_t>;
using Volume16 = Volume3D<std::uint16_t>;

}  // namespace ctpack

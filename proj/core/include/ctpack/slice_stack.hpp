#pragma once

#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "ctpack/image.hpp"

namespace ctpack {

class ResidencyLimiter;

/// A decoded slice that counts against the stack's resident-slice limit
/// until destroyed.
class ResidentSlice {
 public:
  ResidentSlice(Slice16 image, std::shared_ptr<ResidencyLimiter> limiter);
  ~ResidentSlice();
  ResidentSlice(ResidentSlice&&) noexcept = default;
  ResidentSlice& operator=(ResidentSlice&&) noexcept = default;
  ResidentSlice(const ResidentSlice&) = delete;
  ResidentSlice& operator=(const ResidentSlice&) = delete;

  const Slice16& image() const noexcept { return image_; }
  const Slice16* operator->() const noexcept { return &image_; }
  const Slice16& operator*() const noexcept { return image_; }

 private:
  Slice16 image_;
  std::shared_ptr<ResidencyLimiter> limiter_;
};

/// Directory of z-slices, one 16-bit grayscale image per file, z-order given
/// by lexicographic filename order. Opening reads headers only.
class SliceStack {
 public:
  static constexpr std::size_t kDefaultResidentSlices = 2;

  static SliceStack open(const std::filesystem::path& dir,
                         std::size_t max_resident_slices = kDefaultResidentSlices);

  [[nodiscard]] const std::filesystem::path& directory() const noexcept { return dir_; }
  [[nodiscard]] const std::vector<std::filesystem::path>& files() const noexcept { return files_; }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t depth() const noexcept { return files_.size(); }
  [[nodiscard]] std::size_t slice_bytes() const noexcept { return width_ * height_ * sizeof(std::uint16_t); }
  [[nodiscard]] std::size_t max_resident_slices() const noexcept { return max_resident_; }

  /// Micrometres per voxel from `scan.json` next to the slices, if present.
  [[nodiscard]] std::optional<double> voxel_pitch_um() const noexcept { return pitch_um_; }

  /// Decodes slice k (1-based). Blocks while `max_resident_slices` decoded
  /// slices from this stack are alive.
  [[nodiscard]] ResidentSlice read(std::size_t k) const;

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t max_resident_ = kDefaultResidentSlices;
  std::optional<double> pitch_um_;
  std::shared_ptr<ResidencyLimiter> limiter_;
};

class ResidencyLimiter {
 public:
  explicit ResidencyLimiter(std::size_t limit) : limit_(limit) {}
  void acquire();
  void release() noexcept;
  [[nodiscard]] std::size_t in_use() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t in_use_ = 0;
};

}  // namespace ctpack

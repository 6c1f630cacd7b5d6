#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <new>

namespace ctpack {

/// Process-wide counter of bytes held by voxel buffers (slices, subsampled
/// volumes, subvolumes). Every Image2D / Volume3D allocates through
/// TrackingAllocator, so `peak()` bounds what any stage kept resident.
class MemoryTracker {
 public:
  static MemoryTracker& instance() noexcept;

  void on_allocate(std::size_t bytes) noexcept;
  void on_deallocate(std::size_t bytes) noexcept;

  [[nodiscard]] std::size_t current() const noexcept { return current_.load(); }
  [[nodiscard]] std::size_t peak() const noexcept { return peak_.load(); }

  /// Restart peak tracking from the current resident size.
  void reset_peak() noexcept { peak_.store(current_.load()); }

 private:
  std::atomic<std::size_t> current_{0};
  std::atomic<std::size_t> peak_{0};
};

template <typename T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    MemoryTracker::instance().on_allocate(n * sizeof(T));
    return p;
  }

  void deallocate(T* p, std::size_t n) noexcept {
    MemoryTracker::instance().on_deallocate(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <typename U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

/// Scoped peak measurement: records the tracked peak reached while alive,
/// relative to nothing (absolute bytes).
class PeakScope {
 public:
  PeakScope() noexcept { MemoryTracker::instance().reset_peak(); }
  [[nodiscard]] std::size_t peak() const noexcept { return MemoryTracker::instance().peak(); }
};

}  // namespace ctpack

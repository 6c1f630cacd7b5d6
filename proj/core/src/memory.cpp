#include "ctpack/memory.hpp"

namespace ctpack {

MemoryTracker& MemoryTracker::instance() noexcept {
  static MemoryTracker tracker;
  return tracker;
}

void MemoryTracker::on_allocate(std::size_t bytes) noexcept {
  const std::size_t now = current_.fetch_add(bytes) + bytes;
  std::size_t seen = peak_.load();
  while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
  }
}

void MemoryTracker::on_deallocate(std::size_t bytes) noexcept { current_.fetch_sub(bytes); }

}  // namespace ctpack

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "ctpack/alignment.hpp"
#include "ctpack/image.hpp"
#include "ctpack/slice_stack.hpp"

namespace ctpack {

inline constexpr std::size_t kSubsampledSize = 225;
inline constexpr std::size_t kZFactor = 10;

/// In-memory proxy of a whole scan: every aligned slice box-resampled to
/// 225 x 225, then batches of 10 consecutive slices averaged (the last batch
/// averages whatever remains).
struct SubsampledVolume {
  Volume3D<double> data;
  std::size_t z_factor = kZFactor;
  double scale_x = 1.0;  // aligned full-res pixels per subsampled pixel, x
  double scale_y = 1.0;  // same for y
  AlignmentParams alignment;
  std::size_t source_width = 0;
  std::size_t source_height = 0;
  std::size_t source_depth = 0;

  [[nodiscard]] std::size_t depth() const noexcept { return data.nz(); }
};

/// Sparse 1-D area-averaging weights from `src` samples onto `dst` samples.
/// Output i averages the source interval [i*s, (i+1)*s), s = src/dst, with
/// partial pixels weighted by overlap.
struct AreaWeights {
  struct Tap {
    std::size_t src;
    std::size_t dst;
    double weight;
  };
  std::vector<Tap> taps;  // ordered by src, then dst

  static AreaWeights build(std::size_t src, std::size_t dst);
};

struct SubsampleOptions {
  std::size_t size = kSubsampledSize;
  std::size_t z_factor = kZFactor;
};

/// Streams the stack once: at most one decoded slice plus the 2-D
/// accumulators are resident besides the output volume.
SubsampledVolume subsample(const SliceStack& stack, const AlignmentParams& params,
                           const SubsampleOptions& options = {});

/// Raw little-endian doubles in `<stem>.raw` plus a `<stem>.json` header.
void save_subsampled(const std::filesystem::path& stem, const SubsampledVolume& volume);
SubsampledVolume load_subsampled(const std::filesystem::path& stem);

}  // namespace ctpack

#include "ctpack/slice_stack.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "ctpack/error.hpp"
#include "ctpack/slice_io.hpp"

namespace ctpack {

void ResidencyLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_use_ < limit_; });
  ++in_use_;
}

void ResidencyLimiter::release() noexcept {
  {
    std::lock_guard lock(mutex_);
    --in_use_;
  }
  cv_.notify_one();
}

std::size_t ResidencyLimiter::in_use() const {
  std::lock_guard lock(mutex_);
  return in_use_;
}

ResidentSlice::ResidentSlice(Slice16 image, std::shared_ptr<ResidencyLimiter> limiter)
    : image_(std::move(image)), limiter_(std::move(limiter)) {}

ResidentSlice::~ResidentSlice() {
  if (limiter_) limiter_->release();
}

SliceStack SliceStack::open(const std::filesystem::path& dir, std::size_t max_resident_slices) {
  if (!std::filesystem::is_directory(dir)) fail(Errc::NoSlices, dir.string() + " is not a directory");
  if (max_resident_slices == 0) fail(Errc::InvalidArgument, "max_resident_slices must be >= 1");

  SliceStack stack;
  stack.dir_ = dir;
  stack.max_resident_ = max_resident_slices;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && is_slice_file(entry.path())) stack.files_.push_back(entry.path());
  std::sort(stack.files_.begin(), stack.files_.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  if (stack.files_.empty()) fail(Errc::NoSlices, dir.string());

  for (const auto& file : stack.files_) {
    const SliceInfo info = probe_slice(file);
    if (info.bits_per_sample != 16 || info.samples_per_pixel != 1)
      fail(Errc::UnsupportedSampleType, file.string());
    if (&file == &stack.files_.front()) {
      stack.width_ = info.width;
      stack.height_ = info.height;
    } else if (info.width != stack.width_ || info.height != stack.height_) {
      fail(Errc::InconsistentDimensions, file.string() + " is " + std::to_string(info.width) + "x" +
                                             std::to_string(info.height) + ", expected " +
                                             std::to_string(stack.width_) + "x" + std::to_string(stack.height_));
    }
  }

  const auto meta = dir / "scan.json";
  if (std::filesystem::exists(meta)) {
    std::ifstream in(meta);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("voxel_pitch_um")) stack.pitch_um_ = j.at("voxel_pitch_um").get<double>();
  }
  stack.limiter_ = std::make_shared<ResidencyLimiter>(max_resident_slices);
  return stack;
}

ResidentSlice SliceStack::read(std::size_t k) const {
  if (k < 1 || k > files_.size())
    fail(Errc::OutOfRange, "slice " + std::to_string(k) + " outside [1, " + std::to_string(files_.size()) + "]");
  limiter_->acquire();
  try {
    Slice16 image = read_slice_file(files_[k - 1]);
    if (image.width() != width_ || image.height() != height_)
      fail(Errc::InconsistentDimensions, files_[k - 1].string());
    return ResidentSlice(std::move(image), limiter_);
  } catch (...) {
    limiter_->release();
    throw;
  }
}

}  // namespace ctpack

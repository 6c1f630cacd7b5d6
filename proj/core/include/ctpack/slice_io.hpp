#pragma once

#include <cstddef>
#include <filesystem>

#include "ctpack/image.hpp"

namespace ctpack {

struct SliceInfo {
  std::size_t width = 0;
  std::size_t height = 0;
  int bits_per_sample = 0;
  int samples_per_pixel = 0;
};

/// Reads image dimensions and sample layout without decoding pixels.
SliceInfo probe_slice(const std::filesystem::path& file);

/// Decodes a single-page 16-bit grayscale TIFF or PNG. Other sample types
/// raise UnsupportedSampleType; corrupt files raise DecodeError.
Slice16 read_slice_file(const std::filesystem::path& file);

void write_slice_tiff(const std::filesystem::path& file, const Slice16& image);
void write_slice_png(const std::filesystem::path& file, const Slice16& image);

/// True for .tif, .tiff and .png (case-insensitive).
bool is_slice_file(const std::filesystem::path& file);

}  // namespace ctpack

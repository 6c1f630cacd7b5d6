#include "ctpack/slice_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <memory>
#include <vector>

#include "ctpack/error.hpp"

namespace ctpack {
namespace {

std::string lower_extension(const std::filesystem::path& file) {
  std::string ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

bool is_png(const std::filesystem::path& file) { return lower_extension(file) == ".png"; }

struct TiffCloser {
  void operator()(TIFF* tif) const noexcept {
    if (tif) TIFFClose(tif);
  }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

TiffPtr open_tiff(const std::filesystem::path& file, const char* mode) {
  static const bool quiet = [] {
    TIFFSetWarningHandler(nullptr);
    TIFFSetErrorHandler(nullptr);
    return true;
  }();
  (void)quiet;
  TiffPtr tif(TIFFOpen(file.string().c_str(), mode));
  if (!tif) fail(mode[0] == 'r' ? Errc::DecodeError : Errc::WriteError, file.string());
  return tif;
}

SliceInfo probe_tiff(const std::filesystem::path& file) {
  TiffPtr tif = open_tiff(file, "r");
  std::uint32_t w = 0, h = 0;
  std::uint16_t bits = 0, spp = 1;
  if (!TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w) || !TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h))
    fail(Errc::DecodeError, file.string() + ": missing image dimensions");
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  return {w, h, bits, spp};
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& file) : file_(file) {
    fp_.reset(std::fopen(file.string().c_str(), "rb"));
    if (!fp_) fail(Errc::DecodeError, file.string() + ": cannot open");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
      fail(Errc::DecodeError, file.string() + ": not a PNG file");
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) fail(Errc::DecodeError, file.string() + ": libpng init failed");
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  SliceInfo info() {
    if (setjmp(png_jmpbuf(png_))) fail(Errc::DecodeError, file_.string());
    png_init_io(png_, fp_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
    const int color = png_get_color_type(png_, info_);
    const int channels = color == PNG_COLOR_TYPE_GRAY ? 1 : png_get_channels(png_, info_);
    return {png_get_image_width(png_, info_), png_get_image_height(png_, info_),
            png_get_bit_depth(png_, info_), channels};
  }

  // Must follow info().
  void read_rows(Slice16& image) {
    if (setjmp(png_jmpbuf(png_))) fail(Errc::DecodeError, file_.string());
    png_set_swap(png_);  // PNG stores 16-bit samples big-endian
    for (std::size_t y = 0; y < image.height(); ++y)
      png_read_row(png_, reinterpret_cast<png_bytep>(image.row(y).data()), nullptr);
  }

 private:
  std::filesystem::path file_;
  FilePtr fp_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

void require_gray16(const SliceInfo& info, const std::filesystem::path& file) {
  if (info.bits_per_sample != 16 || info.samples_per_pixel != 1)
    fail(Errc::UnsupportedSampleType,
         file.string() + ": " + std::to_string(info.bits_per_sample) + "-bit, " +
             std::to_string(info.samples_per_pixel) + " sample(s); need 16-bit grayscale");
}

}  // namespace

bool is_slice_file(const std::filesystem::path& file) {
  const std::string ext = lower_extension(file);
  return ext == ".tif" || ext == ".tiff" || ext == ".png";
}

SliceInfo probe_slice(const std::filesystem::path& file) {
  if (is_png(file)) return PngReader(file).info();
  return probe_tiff(file);
}

Slice16 read_slice_file(const std::filesystem::path& file) {
  if (is_png(file)) {
    PngReader reader(file);
    const SliceInfo info = reader.info();
    require_gray16(info, file);
    Slice16 image(info.width, info.height);
    reader.read_rows(image);
    return image;
  }

  TiffPtr tif = open_tiff(file, "r");
  std::uint32_t w = 0, h = 0;
  std::uint16_t bits = 0, spp = 1, format = SAMPLEFORMAT_UINT;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);
  require_gray16({w, h, bits, spp}, file);
  if (format != SAMPLEFORMAT_UINT)
    fail(Errc::UnsupportedSampleType, file.string() + ": samples are not unsigned integers");
  if (TIFFIsTiled(tif.get())) fail(Errc::DecodeError, file.string() + ": tiled TIFF is not supported");

  Slice16 image(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    if (TIFFReadScanline(tif.get(), image.row(y).data(), y) < 0)
      fail(Errc::DecodeError, file.string() + ": scanline " + std::to_string(y));
  }
  return image;
}

void write_slice_tiff(const std::filesystem::path& file, const Slice16& image) {
  TiffPtr tif = open_tiff(file, "w");
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(image.width()));
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(image.height()));
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 16);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));
  for (std::size_t y = 0; y < image.height(); ++y) {
    auto* row = const_cast<std::uint16_t*>(image.row(y).data());
    if (TIFFWriteScanline(tif.get(), row, static_cast<std::uint32_t>(y)) < 0)
      fail(Errc::WriteError, file.string() + ": scanline " + std::to_string(y));
  }
}

void write_slice_png(const std::filesystem::path& file, const Slice16& image) {
  FilePtr fp(std::fopen(file.string().c_str(), "wb"));
  if (!fp) fail(Errc::WriteError, file.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::WriteError, file.string() + ": libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::WriteError, file.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);
  for (std::size_t y = 0; y < image.height(); ++y)
    png_write_row(png, reinterpret_cast<png_const_bytep>(image.row(y).data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace ctpack

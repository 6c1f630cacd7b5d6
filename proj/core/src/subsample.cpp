#include "ctpack/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"

namespace ctpack {

AreaWeights AreaWeights::build(std::size_t src, std::size_t dst) {
  if (src == 0 || dst == 0) fail(Errc::InvalidArgument, "area resampling needs non-empty axes");
  AreaWeights w;
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double lo = static_cast<double>(i) * scale;
    const double hi = static_cast<double>(i + 1) * scale;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(src, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t j = first; j < last; ++j) {
      const double overlap = std::min(hi, static_cast<double>(j + 1)) - std::max(lo, static_cast<double>(j));
      if (overlap > 0.0) w.taps.push_back({j, i, overlap / scale});
    }
  }
  std::stable_sort(w.taps.begin(), w.taps.end(), [](const Tap& a, const Tap& b) { return a.src < b.src; });
  return w;
}

SubsampledVolume subsample(const SliceStack& stack, const AlignmentParams& params,
                           const SubsampleOptions& options) {
  params.validate(stack.width(), stack.height());
  if (options.size == 0 || options.z_factor == 0) fail(Errc::InvalidArgument, "subsample size and z factor must be positive");

  const std::size_t crop_w = params.cols.size();
  const std::size_t crop_h = params.rows.size();
  const std::size_t n = options.size;
  const std::size_t depth = (stack.depth() + options.z_factor - 1) / options.z_factor;

  SubsampledVolume out;
  out.z_factor = options.z_factor;
  out.scale_x = static_cast<double>(crop_w) / static_cast<double>(n);
  out.scale_y = static_cast<double>(crop_h) / static_cast<double>(n);
  out.alignment = params;
  out.source_width = stack.width();
  out.source_height = stack.height();
  out.source_depth = stack.depth();
  out.data = Volume3D<double>(n, n, depth);

  const AreaWeights wx = AreaWeights::build(crop_w, n);
  const AreaWeights wy = AreaWeights::build(crop_h, n);

  Image2D<double> row_buffer(crop_w, 1);
  Image2D<double> resampled_row(n, 1);
  Image2D<double> slice_acc(n, n);
  Image2D<double> batch_acc(n, n);
  std::size_t batch_count = 0;
  std::size_t z_out = 0;

  auto flush_batch = [&] {
    auto plane = out.data.plane(z_out);
    const auto acc = batch_acc.pixels();
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = acc[i] / static_cast<double>(batch_count);
    std::fill(batch_acc.pixels().begin(), batch_acc.pixels().end(), 0.0);
    batch_count = 0;
    ++z_out;
  };

  std::size_t ytap = 0;
  for (std::size_t k = 1; k <= stack.depth(); ++k) {
    std::fill(slice_acc.pixels().begin(), slice_acc.pixels().end(), 0.0);
    {
      const ResidentSlice slice = stack.read(k);
      ytap = 0;
      for (std::size_t r = 0; r < crop_h; ++r) {
        aligned_row(*slice, params, r, row_buffer.row(0));
        auto src = row_buffer.row(0);
        auto dst = resampled_row.row(0);
        std::fill(dst.begin(), dst.end(), 0.0);
        for (const auto& tap : wx.taps) dst[tap.dst] += tap.weight * src[tap.src];
        for (; ytap < wy.taps.size() && wy.taps[ytap].src == r; ++ytap) {
          auto acc_row = slice_acc.row(wy.taps[ytap].dst);
          const double w = wy.taps[ytap].weight;
          for (std::size_t i = 0; i < n; ++i) acc_row[i] += w * dst[i];
        }
      }
    }
    auto acc = batch_acc.pixels();
    const auto s = slice_acc.pixels();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
    if (++batch_count == options.z_factor) flush_batch();
  }
  if (batch_count > 0) flush_batch();
  return out;
}

void save_subsampled(const std::filesystem::path& stem, const SubsampledVolume& volume) {
  auto raw = stem;
  raw += ".raw";
  auto header = stem;
  header += ".json";
  {
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::WriteError, raw.string());
    out.write(reinterpret_cast<const char*>(volume.data.data()),
              static_cast<std::streamsize>(volume.data.bytes()));
    if (!out) fail(Errc::WriteError, raw.string());
  }
  nlohmann::json j = {
      {"dims", {volume.data.nx(), volume.data.ny(), volume.data.nz()}},
      {"dtype", "f64"},
      {"z_factor", volume.z_factor},
      {"scale", {volume.scale_x, volume.scale_y}},
      {"alignment", to_json(volume.alignment)},
      {"source_dims", {volume.source_width, volume.source_height, volume.source_depth}},
  };
  write_json_file(header, j);
}

SubsampledVolume load_subsampled(const std::filesystem::path& stem) {
  auto raw = stem;
  raw += ".raw";
  auto header = stem;
  header += ".json";
  const nlohmann::json j = read_json_file(header);
  SubsampledVolume v;
  const auto dims = j.at("dims");
  v.data = Volume3D<double>(dims[0].get<std::size_t>(), dims[1].get<std::size_t>(), dims[2].get<std::size_t>());
  v.z_factor = j.at("z_factor").get<std::size_t>();
  v.scale_x = j.at("scale")[0].get<double>();
  v.scale_y = j.at("scale")[1].get<double>();
  v.alignment = alignment_from_json(j.at("alignment"));
  v.source_width = j.at("source_dims")[0].get<std::size_t>();
  v.source_height = j.at("source_dims")[1].get<std::size_t>();
  v.source_depth = j.at("source_dims")[2].get<std::size_t>();
  std::ifstream in(raw, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + raw.string());
  in.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(v.data.bytes()));
  if (in.gcount() != static_cast<std::streamsize>(v.data.bytes()))
    fail(Errc::DecodeError, raw.string() + " is truncated");
  return v;
}

}  // namespace ctpack

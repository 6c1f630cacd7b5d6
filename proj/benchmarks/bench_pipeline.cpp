#include <benchmark/benchmark.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "ctpack/marching_cubes.hpp"
#include "ctpack/peaks.hpp"
#include "ctpack/segmentation.hpp"
#include "ctpack/slice_io.hpp"
#include "ctpack/subsample.hpp"

using namespace ctpack;
namespace fs = std::filesystem;

namespace {

Image2D<double> grid_lines(std::size_t size, std::size_t n) {
  Image2D<double> img(size, size);
  for (std::size_t k = 0; k <= n; ++k) {
    const std::size_t at = 10 + k * (size - 21) / n;
    for (std::size_t i = 10; i < size - 10; ++i) {
      img(at, i) = 1.0;
      img(i, at) = 1.0;
    }
  }
  return rotate_image(img, 3.0);
}

// Slices on disk for the subsample benchmark, written once.
const fs::path& bench_stack(std::size_t size) {
  static const fs::path dir = [size] {
    const fs::path d = fs::temp_directory_path() / ("ctpack_bench_" + std::to_string(size));
    fs::create_directories(d);
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> v(0, 65535);
    for (int k = 0; k < 20; ++k) {
      Slice16 s(size, size);
      for (auto& px : s.pixels()) px = static_cast<std::uint16_t>(v(rng));
      write_slice_tiff(d / ("s" + std::to_string(100 + k) + ".tif"), s);
    }
    return d;
  }();
  return dir;
}

}  // namespace

static void BM_Subsample(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const SliceStack stack = SliceStack::open(bench_stack(size));
  const AlignmentParams p{3.7, {size / 10, size - size / 10}, {size / 10, size - size / 10}};
  for (auto _ : state) benchmark::DoNotOptimize(subsample(stack, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stack.depth()));
}
BENCHMARK(BM_Subsample)->Arg(600)->Unit(benchmark::kMillisecond);

static void BM_MarchingCubes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Volume16 v(n, n, n);
  const double c = (static_cast<double>(n) - 1) / 2, r = static_cast<double>(n) / 3;
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double d = std::sqrt((x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c));
        v(x, y, z) = static_cast<std::uint16_t>(std::clamp(20000.0 + 1000.0 * (r - d), 0.0, 65535.0));
      }
  for (auto _ : state) benchmark::DoNotOptimize(marching_cubes(v, 20000.0));
}
BENCHMARK(BM_MarchingCubes)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_RotationObjective(benchmark::State& state) {
  const Image2D<double> mask = grid_lines(kSubsampledSize, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rotation_objective(mask, 1.3));
}
BENCHMARK(BM_RotationObjective)->Unit(benchmark::kMicrosecond);

static void BM_AutoRotate(benchmark::State& state) {
  const Image2D<double> mask = grid_lines(kSubsampledSize, 4);
  for (auto _ : state) benchmark::DoNotOptimize(auto_rotate(mask));
}
BENCHMARK(BM_AutoRotate)->Unit(benchmark::kMillisecond);

static void BM_FindPeaks(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<double>(i) * 0.05) * 10.0 + noise(rng);
  for (auto _ : state) benchmark::DoNotOptimize(find_peaks(x));
}
BENCHMARK(BM_FindPeaks)->Arg(80)->Arg(4096);

BENCHMARK_MAIN();

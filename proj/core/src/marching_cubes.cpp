#include "ctpack/marching_cubes.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "ctpack/error.hpp"
#include "mc_tables.hpp"

namespace ctpack {
namespace {

constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Keeps interpolated vertices off the cell corners so a sample exactly at the
// isolevel cannot collapse a triangle to zero area.
constexpr double kEdgeClamp = 1e-4;

}  // namespace

template <typename T>
Mesh marching_cubes(const Volume3D<T>& volume, double isolevel, const MarchingCubesOptions& options) {
  if (volume.empty()) fail(Errc::InvalidArgument, "marching cubes on an empty volume");
  const long long border = options.zero_border ? 1 : 0;
  const long long nx = static_cast<long long>(volume.nx());
  const long long ny = static_cast<long long>(volume.ny());
  const long long nz = static_cast<long long>(volume.nz());
  // Grid points, including the virtual border.
  const long long gx = nx + 2 * border, gy = ny + 2 * border, gz = nz + 2 * border;
  if (gx < 2 || gy < 2 || gz < 2) fail(Errc::InvalidArgument, "volume needs at least 2 samples per axis");

  auto sample = [&](long long i, long long j, long long k) -> double {
    i -= border;
    j -= border;
    k -= border;
    if (i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz) return 0.0;
    return static_cast<double>(
        volume(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k)));
  };

  Mesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  auto vertex_on_edge = [&](long long i, long long j, long long k, int edge, const std::array<double, 8>& v) {
    const int a = kEdgeCorners[static_cast<std::size_t>(edge)][0];
    const int b = kEdgeCorners[static_cast<std::size_t>(edge)][1];
    const auto& ca = kCorner[static_cast<std::size_t>(a)];
    const auto& cb = kCorner[static_cast<std::size_t>(b)];
    int axis = 0;
    while (ca[static_cast<std::size_t>(axis)] == cb[static_cast<std::size_t>(axis)]) ++axis;
    const auto& lo = ca[static_cast<std::size_t>(axis)] < cb[static_cast<std::size_t>(axis)] ? ca : cb;
    const long long li = i + lo[0], lj = j + lo[1], lk = k + lo[2];
    const std::uint64_t key = ((static_cast<std::uint64_t>(lk) * static_cast<std::uint64_t>(gy) +
                                static_cast<std::uint64_t>(lj)) * static_cast<std::uint64_t>(gx) +
                               static_cast<std::uint64_t>(li)) * 3 + static_cast<std::uint64_t>(axis);
    auto [it, inserted] = edge_vertex.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) {
      const double va = v[static_cast<std::size_t>(a)];
      const double vb = v[static_cast<std::size_t>(b)];
      double t = (isolevel - va) / (vb - va);
      t = std::clamp(t, kEdgeClamp, 1.0 - kEdgeClamp);
      const double off = static_cast<double>(border);
      mesh.vertices.push_back({static_cast<double>(i + ca[0]) + t * (cb[0] - ca[0]) - off,
                               static_cast<double>(j + ca[1]) + t * (cb[1] - ca[1]) - off,
                               static_cast<double>(k + ca[2]) + t * (cb[2] - ca[2]) - off});
    }
    return it->second;
  };

  std::array<double, 8> v{};
  for (long long k = 0; k + 1 < gz; ++k) {
    for (long long j = 0; j + 1 < gy; ++j) {
      for (long long i = 0; i + 1 < gx; ++i) {
        unsigned cube = 0;
        for (std::size_t c = 0; c < 8; ++c) {
          v[c] = sample(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (v[c] < isolevel) cube |= 1u << c;
        }
        if (detail::kEdgeTable[cube] == 0) continue;
        const auto& tris = detail::kTriTable[cube];
        for (std::size_t t = 0; tris[t] >= 0; t += 3) {
          // Table winding faces the low side; reversed so normals point out of the object.
          const std::uint32_t p0 = vertex_on_edge(i, j, k, tris[t], v);
          const std::uint32_t p1 = vertex_on_edge(i, j, k, tris[t + 1], v);
          const std::uint32_t p2 = vertex_on_edge(i, j, k, tris[t + 2], v);
          mesh.faces.push_back({p0, p2, p1});
        }
      }
    }
  }
  if (mesh.faces.empty()) fail(Errc::EmptyMesh, "no voxel crosses isolevel " + std::to_string(isolevel));
  return mesh;
}

template Mesh marching_cubes(const Volume3D<std::uint16_t>&, double, const MarchingCubesOptions&);
template Mesh marching_cubes(const Volume3D<double>&, double, const MarchingCubesOptions&);

}  // namespace ctpack

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ctpack {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  bool operator==(const Vec3&) const = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

using Face = std::array<std::uint32_t, 3>;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  [[nodiscard]] bool empty() const noexcept { return faces.empty(); }
};

struct Bounds {
  Vec3 min;
  Vec3 max;
};

/// Number of distinct undirected edges.
std::size_t edge_count(const Mesh& mesh);

/// V - E + F over the vertices referenced by faces.
long long euler_characteristic(const Mesh& mesh);

/// Every edge is shared by exactly two faces.
bool is_watertight(const Mesh& mesh);

double surface_area(const Mesh& mesh);

/// Volume enclosed by a closed, consistently oriented mesh (absolute value).
double enclosed_volume(const Mesh& mesh);

/// Area-weighted centroid of the surface.
Vec3 surface_centroid(const Mesh& mesh);

Bounds bounds(const Mesh& mesh);

/// Face index lists of edge-connected components, largest first.
std::vector<std::vector<std::size_t>> connected_components(const Mesh& mesh);

/// Copy of the given faces with unreferenced vertices dropped.
Mesh submesh(const Mesh& mesh, const std::vector<std::size_t>& face_ids);

/// Drops faces with repeated vertex indices or zero area.
Mesh remove_degenerate_faces(const Mesh& mesh);

struct CleanResult {
  Mesh mesh;
  bool watertight = false;
  std::size_t components = 0;
};

/// Keeps the watertight component with the most faces; when no component
/// is watertight, keeps the largest component and reports watertight=false.
CleanResult clean_mesh(const Mesh& mesh);

}  // namespace ctpack

#include "ctpack/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ctpack/error.hpp"

namespace ctpack {
namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::unordered_map<std::uint64_t, std::uint32_t> edge_use(const Mesh& mesh) {
  std::unordered_map<std::uint64_t, std::uint32_t> use;
  use.reserve(mesh.faces.size() * 2);
  for (const Face& f : mesh.faces)
    for (int i = 0; i < 3; ++i) ++use[edge_key(f[i], f[(i + 1) % 3])];
  return use;
}

double face_area(const Mesh& m, const Face& f) {
  const Vec3 n = cross(m.vertices[f[1]] - m.vertices[f[0]], m.vertices[f[2]] - m.vertices[f[0]]);
  return 0.5 * std::sqrt(dot(n, n));
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::size_t edge_count(const Mesh& mesh) { return edge_use(mesh).size(); }

long long euler_characteristic(const Mesh& mesh) {
  std::vector<bool> used(mesh.vertices.size(), false);
  for (const Face& f : mesh.faces)
    for (auto v : f) used[v] = true;
  const auto v = std::count(used.begin(), used.end(), true);
  return static_cast<long long>(v) - static_cast<long long>(edge_count(mesh)) +
         static_cast<long long>(mesh.faces.size());
}

bool is_watertight(const Mesh& mesh) {
  if (mesh.faces.empty()) return false;
  for (const auto& [key, count] : edge_use(mesh))
    if (count != 2) return false;
  return true;
}

double surface_area(const Mesh& mesh) {
  double area = 0.0;
  for (const Face& f : mesh.faces) area += face_area(mesh, f);
  return area;
}

double enclosed_volume(const Mesh& mesh) {
  double six_v = 0.0;
  for (const Face& f : mesh.faces)
    six_v += dot(mesh.vertices[f[0]], cross(mesh.vertices[f[1]], mesh.vertices[f[2]]));
  return std::abs(six_v) / 6.0;
}

Vec3 surface_centroid(const Mesh& mesh) {
  Vec3 sum;
  double total = 0.0;
  for (const Face& f : mesh.faces) {
    const double a = face_area(mesh, f);
    sum = sum + (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) * (a / 3.0);
    total += a;
  }
  return total > 0.0 ? sum * (1.0 / total) : sum;
}

Bounds bounds(const Mesh& mesh) {
  Bounds b;
  if (mesh.vertices.empty()) return b;
  b.min = b.max = mesh.vertices.front();
  for (const Vec3& v : mesh.vertices) {
    b.min = {std::min(b.min.x, v.x), std::min(b.min.y, v.y), std::min(b.min.z, v.z)};
    b.max = {std::max(b.max.x, v.x), std::max(b.max.y, v.y), std::max(b.max.z, v.z)};
  }
  return b;
}

std::vector<std::vector<std::size_t>> connected_components(const Mesh& mesh) {
  DisjointSet sets(mesh.faces.size());
  std::unordered_map<std::uint64_t, std::size_t> first_face;
  first_face.reserve(mesh.faces.size() * 2);
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    for (int i = 0; i < 3; ++i) {
      auto [it, inserted] = first_face.emplace(edge_key(f[i], f[(i + 1) % 3]), fi);
      if (!inserted) sets.unite(it->second, fi);
    }
  }
  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const std::size_t root = sets.find(fi);
    auto [it, inserted] = slot.emplace(root, components.size());
    if (inserted) components.emplace_back();
    components[it->second].push_back(fi);
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return components;
}

Mesh submesh(const Mesh& mesh, const std::vector<std::size_t>& face_ids) {
  Mesh out;
  std::vector<std::uint32_t> remap(mesh.vertices.size(), UINT32_MAX);
  out.faces.reserve(face_ids.size());
  for (std::size_t fi : face_ids) {
    Face f = mesh.faces[fi];
    for (auto& v : f) {
      if (remap[v] == UINT32_MAX) {
        remap[v] = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[v]);
      }
      v = remap[v];
    }
    out.faces.push_back(f);
  }
  return out;
}

Mesh remove_degenerate_faces(const Mesh& mesh) {
  std::vector<std::size_t> keep;
  keep.reserve(mesh.faces.size());
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
    if (!(face_area(mesh, f) > 0.0)) continue;
    keep.push_back(fi);
  }
  return submesh(mesh, keep);
}

CleanResult clean_mesh(const Mesh& mesh) {
  if (mesh.faces.empty()) fail(Errc::EmptyAfterClean, "mesh has no faces");
  const Mesh valid = remove_degenerate_faces(mesh);
  if (valid.faces.empty()) fail(Errc::EmptyAfterClean, "every face is degenerate");

  const auto components = connected_components(valid);
  // An edge belongs to exactly one edge-connected component, so global edge
  // counts decide watertightness per component.
  const auto use = edge_use(valid);
  auto component_watertight = [&](const std::vector<std::size_t>& component) {
    for (std::size_t fi : component) {
      const Face& f = valid.faces[fi];
      for (int i = 0; i < 3; ++i)
        if (use.at(edge_key(f[i], f[(i + 1) % 3])) != 2) return false;
    }
    return true;
  };

  CleanResult result;
  result.components = components.size();
  for (const auto& component : components) {  // largest first
    if (component_watertight(component)) {
      result.mesh = submesh(valid, component);
      result.watertight = true;
      return result;
    }
  }
  result.mesh = submesh(valid, components.front());
  result.watertight = false;
  return result;
}

}  // namespace ctpack

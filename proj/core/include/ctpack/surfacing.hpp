#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctpack/image.hpp"
#include "ctpack/mesh.hpp"
#include "ctpack/subvolume_store.hpp"

namespace ctpack {

struct SurfaceJob {
  std::string id;
  double isolevel = 0.0;
  double voxel_pitch_um = 1.0;
  std::filesystem::path output_dir;
  Vec3 origin;  // voxel offset of the subvolume inside the scan
};

/// "21000" for integral levels, shortest round-trip decimal otherwise.
std::string format_isolevel(double isolevel);

/// `{id}_iso{isolevel}.ply`
std::string mesh_filename(const std::string& id, double isolevel);

/// Voxel coordinates (plus origin) to millimetres.
Mesh scale_mesh(const Mesh& mesh, double voxel_pitch_um, Vec3 origin = {});

/// Scales to mm and writes binary PLY into job.output_dir; returns the path.
std::filesystem::path scale_and_write(const Mesh& mesh, const SurfaceJob& job);

struct SurfaceReport {
  std::string id;
  double isolevel = 0.0;
  std::string status = "ok";  // ok | empty_mesh | error
  std::string message;
  bool watertight = false;
  std::size_t components = 0;
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  Bounds bounds_mm;
  Vec3 centroid_mm;
  std::filesystem::path path;

  [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
};

nlohmann::json to_json(const SurfaceReport& report);

/// Marching cubes, cleaning, scaling and writing for one in-memory subvolume.
/// EmptyMesh / EmptyAfterClean are reported with status "empty_mesh".
SurfaceReport surface_volume(const Volume16& volume, const SurfaceJob& job);

/// Loads `job.id` from the store (refusing loads over `memory_budget`) and
/// surfaces it.
SurfaceReport surface_object(const SubvolumeStore& store, const SurfaceJob& job, std::size_t memory_budget);

/// Number of concurrent jobs such that workers x largest subvolume fits the
/// budget; at least 1, at most `max_workers`.
std::size_t surface_pool_width(std::size_t max_workers, std::size_t largest_bytes, std::size_t memory_budget);

/// Runs every job on a pool of surface_pool_width() threads. Reports come back
/// in job order; per-job failures are captured in the report.
std::vector<SurfaceReport> surface_all(const SubvolumeStore& store, const std::vector<SurfaceJob>& jobs,
                                       std::size_t memory_budget, std::size_t max_workers);

}  // namespace ctpack

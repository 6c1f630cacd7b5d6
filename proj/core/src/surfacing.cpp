#include "ctpack/surfacing.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>

#include "ctpack/error.hpp"
#include "ctpack/marching_cubes.hpp"
#include "ctpack/ply.hpp"

namespace ctpack {

std::string format_isolevel(double isolevel) {
  char buf[64];
  if (std::isfinite(isolevel) && isolevel == std::trunc(isolevel) && std::abs(isolevel) < 1e15) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(isolevel));
    return std::string(buf, end);
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), isolevel);
  return std::string(buf, end);
}

std::string mesh_filename(const std::string& id, double isolevel) {
  return id + "_iso" + format_isolevel(isolevel) + ".ply";
}

Mesh scale_mesh(const Mesh& mesh, double voxel_pitch_um, Vec3 origin) {
  Mesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(mesh.vertices.size());
  const double mm = voxel_pitch_um / 1000.0;
  for (const Vec3& v : mesh.vertices) out.vertices.push_back((v + origin) * mm);
  return out;
}

std::filesystem::path scale_and_write(const Mesh& mesh, const SurfaceJob& job) {
  std::error_code ec;
  std::filesystem::create_directories(job.output_dir, ec);
  const auto path = job.output_dir / mesh_filename(job.id, job.isolevel);
  write_ply(path, scale_mesh(mesh, job.voxel_pitch_um, job.origin));
  return path;
}

nlohmann::json to_json(const SurfaceReport& r) {
  auto vec = [](Vec3 v) { return nlohmann::json::array({v.x, v.y, v.z}); };
  nlohmann::json j = {
      {"identifier", r.id},
      {"isolevel", r.isolevel},
      {"status", r.status},
      {"watertight", r.watertight},
      {"components", r.components},
      {"vertex_count", r.vertex_count},
      {"face_count", r.face_count},
  };
  if (!r.message.empty()) j["message"] = r.message;
  if (r.ok()) {
    j["bounds_mm"] = {{"min", vec(r.bounds_mm.min)}, {"max", vec(r.bounds_mm.max)}};
    j["centroid_mm"] = vec(r.centroid_mm);
    j["file"] = r.path.filename().string();
  }
  return j;
}

SurfaceReport surface_volume(const Volume16& volume, const SurfaceJob& job) {
  SurfaceReport report;
  report.id = job.id;
  report.isolevel = job.isolevel;
  try {
    const Mesh raw = marching_cubes(volume, job.isolevel);
    CleanResult cleaned = clean_mesh(raw);
    report.watertight = cleaned.watertight;
    report.components = cleaned.components;
    report.vertex_count = cleaned.mesh.vertices.size();
    report.face_count = cleaned.mesh.faces.size();
    report.path = scale_and_write(cleaned.mesh, job);
    const Mesh mm = scale_mesh(cleaned.mesh, job.voxel_pitch_um, job.origin);
    report.bounds_mm = bounds(mm);
    report.centroid_mm = surface_centroid(mm);
  } catch (const Error& e) {
    if (e.code() != Errc::EmptyMesh && e.code() != Errc::EmptyAfterClean) throw;
    report.status = "empty_mesh";
    report.message = e.what();
  }
  return report;
}

SurfaceReport surface_object(const SubvolumeStore& store, const SurfaceJob& job, std::size_t memory_budget) {
  const Volume16 volume = store.load(job.id, memory_budget);
  return surface_volume(volume, job);
}

std::size_t surface_pool_width(std::size_t max_workers, std::size_t largest_bytes, std::size_t memory_budget) {
  std::size_t width = std::max<std::size_t>(1, max_workers);
  if (largest_bytes > 0) width = std::min(width, std::max<std::size_t>(1, memory_budget / largest_bytes));
  return width;
}

std::vector<SurfaceReport> surface_all(const SubvolumeStore& store, const std::vector<SurfaceJob>& jobs,
                                       std::size_t memory_budget, std::size_t max_workers) {
  std::size_t largest = 0;
  for (const SurfaceJob& job : jobs) largest = std::max(largest, store.resident_bytes(job.id));
  const std::size_t width = std::min(surface_pool_width(max_workers, largest, memory_budget),
                                     std::max<std::size_t>(1, jobs.size()));
  // Each worker may hold one subvolume, so give each a slice of the budget.
  const std::size_t per_worker = memory_budget / width;

  std::vector<SurfaceReport> reports(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        reports[i] = surface_object(store, jobs[i], per_worker);
      } catch (const std::exception& e) {
        reports[i].id = jobs[i].id;
        reports[i].isolevel = jobs[i].isolevel;
        reports[i].status = "error";
        reports[i].message = e.what();
      }
    }
  };
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  }
  return reports;
}

}  // namespace ctpack

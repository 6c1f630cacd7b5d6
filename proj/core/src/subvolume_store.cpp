#include "ctpack/subvolume_store.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

#include "ctpack/error.hpp"
#include "ctpack/metadata.hpp"

namespace ctpack {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};

}  // namespace

SubvolumeStore::SubvolumeStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path SubvolumeStore::raw_path(const std::string& id) const { return root_ / (id + ".raw"); }
std::filesystem::path SubvolumeStore::header_path(const std::string& id) const { return root_ / (id + ".json"); }

void SubvolumeStore::write_header(const std::string& id, const State& s) const {
  nlohmann::json j = {
      {"id", id},
      {"dims", {s.nx, s.ny, s.nz}},
      {"dtype", "u16"},
      {"box", s.box},
      {"transform", s.transform},
      {"z_written", s.z_written},
      {"finalized", s.finalized},
  };
  write_json_file(header_path(id), j);
}

SubvolumeStore::State SubvolumeStore::state_copy(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = states_.find(id); it != states_.end()) return it->second;
  }
  // Objects written by another process (or an earlier run) are read back from their header.
  if (!std::filesystem::exists(header_path(id))) fail(Errc::NotRegistered, id);
  const nlohmann::json j = read_json_file(header_path(id));
  State s;
  s.nx = j.at("dims")[0].get<std::size_t>();
  s.ny = j.at("dims")[1].get<std::size_t>();
  s.nz = j.at("dims")[2].get<std::size_t>();
  s.z_written = j.at("z_written").get<std::size_t>();
  s.finalized = j.at("finalized").get<bool>();
  s.box = j.at("box");
  s.transform = j.at("transform");
  return s;
}

void SubvolumeStore::register_object(const std::string& id, std::size_t nx, std::size_t ny, std::size_t nz,
                                     const nlohmann::json& box, const nlohmann::json& transform) {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos)
    fail(Errc::InvalidArgument, "invalid object identifier '" + id + "'");
  if (nx == 0 || ny == 0 || nz == 0) fail(Errc::DimsMismatch, id + ": zero-sized box");
  State s{nx, ny, nz, 0, false, box, transform};
  {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(raw_path(id).string().c_str(), "wb"));
    if (!f) fail(Errc::WriteError, raw_path(id).string());
  }
  write_header(id, s);
  std::lock_guard lock(mutex_);
  states_[id] = std::move(s);
}

void SubvolumeStore::append_bytes(const std::string& id, std::size_t z_start, std::size_t nx, std::size_t ny,
                                  std::size_t nz, const std::uint16_t* samples) {
  {
    std::lock_guard lock(mutex_);
    auto it = states_.find(id);
    if (it == states_.end()) fail(Errc::NotRegistered, id);
    State& s = it->second;
    if (nx != s.nx || ny != s.ny)
      fail(Errc::DimsMismatch, id + ": chunk is " + std::to_string(nx) + "x" + std::to_string(ny) + ", box is " +
                                   std::to_string(s.nx) + "x" + std::to_string(s.ny));
    if (s.finalized || z_start != s.z_written || s.z_written + nz > s.nz)
      fail(Errc::NonContiguousAppend, id + ": append at z=" + std::to_string(z_start) + " of " +
                                          std::to_string(nz) + " slice(s); written " +
                                          std::to_string(s.z_written) + " of " + std::to_string(s.nz));
  }
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(raw_path(id).string().c_str(), "ab"));
  if (!f) fail(Errc::WriteError, raw_path(id).string());
  const std::size_t count = nx * ny * nz;
  if (std::fwrite(samples, sizeof(std::uint16_t), count, f.get()) != count)
    fail(Errc::WriteError, raw_path(id).string());
  std::lock_guard lock(mutex_);
  states_[id].z_written += nz;
}

void SubvolumeStore::append(const std::string& id, std::size_t z_start, const Volume16& chunk) {
  append_bytes(id, z_start, chunk.nx(), chunk.ny(), chunk.nz(), chunk.data());
}

void SubvolumeStore::append(const std::string& id, std::size_t z_start, const Slice16& slice) {
  append_bytes(id, z_start, slice.width(), slice.height(), 1, slice.data());
}

void SubvolumeStore::finalize(const std::string& id) {
  State copy;
  {
    std::lock_guard lock(mutex_);
    auto it = states_.find(id);
    if (it == states_.end()) fail(Errc::NotRegistered, id);
    if (it->second.z_written != it->second.nz)
      fail(Errc::NonContiguousAppend, id + ": finalized with " + std::to_string(it->second.z_written) + " of " +
                                          std::to_string(it->second.nz) + " slices");
    it->second.finalized = true;
    copy = it->second;
  }
  write_header(id, copy);
}

std::size_t SubvolumeStore::z_written(const std::string& id) const { return state_copy(id).z_written; }
bool SubvolumeStore::is_finalized(const std::string& id) const { return state_copy(id).finalized; }
nlohmann::json SubvolumeStore::header(const std::string& id) const { return read_json_file(header_path(id)); }

std::vector<std::string> SubvolumeStore::objects() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root_))
    if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t SubvolumeStore::resident_bytes(const std::string& id) const {
  const State s = state_copy(id);
  return s.nx * s.ny * s.nz * sizeof(std::uint16_t);
}

Volume16 SubvolumeStore::load(const std::string& id, std::size_t memory_budget) const {
  const State s = state_copy(id);
  if (!s.finalized) fail(Errc::NotFinalized, id);
  const std::size_t needed = s.nx * s.ny * s.nz * sizeof(std::uint16_t);
  if (needed > memory_budget)
    fail(Errc::ExceedsMemoryBudget, id + ": needs " + std::to_string(needed) + " bytes, budget " +
                                        std::to_string(memory_budget));
  Volume16 vol(s.nx, s.ny, s.nz);
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(raw_path(id).string().c_str(), "rb"));
  if (!f) fail(Errc::IoError, raw_path(id).string());
  if (std::fread(vol.data(), sizeof(std::uint16_t), vol.size(), f.get()) != vol.size())
    fail(Errc::DecodeError, raw_path(id).string() + " is truncated");
  return vol;
}

}  // namespace ctpack

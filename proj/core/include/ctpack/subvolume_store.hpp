#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctpack/image.hpp"

namespace ctpack {

/// On-disk, append-only store of per-object subvolumes: `<id>.raw` holds raw
/// little-endian u16 samples slice after slice, `<id>.json` the header
/// {dims, dtype, box, transform, z_written, finalized}. Appends to different
/// ids may run concurrently; a single id needs a single producer.
class SubvolumeStore {
 public:
  explicit SubvolumeStore(std::filesystem::path root);

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }

  /// Creates (truncating) the object's files for an nx x ny x nz box.
  void register_object(const std::string& id, std::size_t nx, std::size_t ny, std::size_t nz,
                       const nlohmann::json& box = nlohmann::json::object(),
                       const nlohmann::json& transform = nlohmann::json::object());

  /// Appends chunk.nz() slices starting at `z_start`, which must equal the
  /// number of slices already written.
  void append(const std::string& id, std::size_t z_start, const Volume16& chunk);
  void append(const std::string& id, std::size_t z_start, const Slice16& slice);

  /// Marks the object complete; its written depth must equal the registered nz.
  void finalize(const std::string& id);

  [[nodiscard]] std::size_t z_written(const std::string& id) const;
  [[nodiscard]] bool is_finalized(const std::string& id) const;
  [[nodiscard]] nlohmann::json header(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> objects() const;

  /// Bytes load() would allocate for `id`.
  [[nodiscard]] std::size_t resident_bytes(const std::string& id) const;

  /// Reads a finalized object. Throws ExceedsMemoryBudget before allocating
  /// if the volume would not fit in `memory_budget` bytes.
  [[nodiscard]] Volume16 load(const std::string& id, std::size_t memory_budget) const;

 private:
  struct State {
    std::size_t nx = 0, ny = 0, nz = 0;
    std::size_t z_written = 0;
    bool finalized = false;
    nlohmann::json box;
    nlohmann::json transform;
  };

  std::filesystem::path raw_path(const std::string& id) const;
  std::filesystem::path header_path(const std::string& id) const;
  State state_copy(const std::string& id) const;
  void write_header(const std::string& id, const State& state) const;
  void append_bytes(const std::string& id, std::size_t z_start, std::size_t nx, std::size_t ny,
                    std::size_t nz, const std::uint16_t* samples);

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::string, State> states_;
};

}  // namespace ctpack

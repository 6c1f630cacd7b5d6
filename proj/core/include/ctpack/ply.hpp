#pragma once

#include <filesystem>

#include "ctpack/mesh.hpp"

namespace ctpack {

/// Binary little-endian PLY: float32 x/y/z per vertex, uchar-counted uint32
/// vertex lists per face. Throws WriteError on I/O failure.
void write_ply(const std::filesystem::path& file, const Mesh& mesh);

/// Reads files written by write_ply (and any binary_little_endian PLY with
/// float or double positions and triangle faces).
Mesh read_ply(const std::filesystem::path& file);

}  // namespace ctpack

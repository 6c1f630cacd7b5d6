#pragma once

#include <cstdint>

#include "ctpack/image.hpp"
#include "ctpack/mesh.hpp"

namespace ctpack {

struct MarchingCubesOptions {
  /// Surround the volume with a virtual one-voxel border of zeros so objects
  /// touching the box faces still produce closed surfaces.
  bool zero_border = true;
};

/// Isosurface of {v = isolevel} with linear interpolation along cell edges.
/// Samples >= isolevel are inside. Vertices are in voxel-index coordinates
/// (voxel (i,j,k) sits at (i,j,k)); shared edge vertices are welded.
/// Throws EmptyMesh when nothing crosses the isolevel.
template <typename T>
Mesh marching_cubes(const Volume3D<T>& volume, double isolevel, const MarchingCubesOptions& options = {});

extern template Mesh marching_cubes(const Volume3D<std::uint16_t>&, double, const MarchingCubesOptions&);
extern template Mesh marching_cubes(const Volume3D<double>&, double, const MarchingCubesOptions&);

}  // namespace ctpack

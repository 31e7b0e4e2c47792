#pragma once

#include <filesystem>

#include "mvf/mesh.h"

namespace mvf {

// ASCII OBJ. Faces with more than three vertices are fan-triangulated;
// vertex normals (vn + v//vn references) are kept when present. Texture
// coordinates and materials are ignored.
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

// Point-cloud PLY, binary little-endian, float32 x,y,z[,nx,ny,nz].
OrientedPointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path,
               const OrientedPointCloud& cloud);

}  // namespace mvf

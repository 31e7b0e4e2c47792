#include "mvf/mesh_io.h"

#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mvf/errors.h"

namespace mvf {

namespace {

int resolve_obj_index(int raw, int count, const std::string& path) {
  // OBJ indices are 1-based; negative values count from the end.
  int idx = raw > 0 ? raw - 1 : count + raw;
  if (idx < 0 || idx >= count) {
    throw IoError(path + ": face index " + std::to_string(raw) +
                  " out of range");
  }
  return idx;
}

}  // namespace

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open OBJ file: " + path.string());

  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  // Per corner: position index and normal index (-1 when absent).
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<int, 3>> face_normals;
  bool any_normal_ref = false;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      ss >> p[0] >> p[1] >> p[2];
      if (!ss) throw IoError(path.string() + ": malformed vertex line");
      positions.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      ss >> n[0] >> n[1] >> n[2];
      if (!ss) throw IoError(path.string() + ": malformed normal line");
      normals.push_back(n);
    } else if (tag == "f") {
      std::vector<int> vi;
      std::vector<int> ni;
      std::string corner;
      while (ss >> corner) {
        // v, v/t, v//n or v/t/n
        int v = 0, n = 0;
        bool has_n = false;
        size_t s1 = corner.find('/');
        if (s1 == std::string::npos) {
          v = std::stoi(corner);
        } else {
          v = std::stoi(corner.substr(0, s1));
          size_t s2 = corner.find('/', s1 + 1);
          if (s2 != std::string::npos && s2 + 1 < corner.size()) {
            n = std::stoi(corner.substr(s2 + 1));
            has_n = true;
          }
        }
        vi.push_back(resolve_obj_index(v, int(positions.size()), path.string()));
        ni.push_back(has_n
                         ? resolve_obj_index(n, int(normals.size()), path.string())
                         : -1);
        if (has_n) any_normal_ref = true;
      }
      if (vi.size() < 3) {
        throw IoError(path.string() + ": face with fewer than 3 vertices");
      }
      for (size_t k = 1; k + 1 < vi.size(); ++k) {
        faces.push_back({vi[0], vi[k], vi[k + 1]});
        face_normals.push_back({ni[0], ni[k], ni[k + 1]});
      }
    }
    // Other tags (vt, o, g, s, usemtl, mtllib) are ignored.
  }

  std::vector<Vec3> vertex_normals;
  if (any_normal_ref && !normals.empty()) {
    // Scatter referenced normals onto vertices; last reference wins.
    vertex_normals.assign(positions.size(), Vec3::UnitZ());
    std::vector<bool> seen(positions.size(), false);
    for (size_t f = 0; f < faces.size(); ++f) {
      for (int k = 0; k < 3; ++k) {
        if (face_normals[f][k] >= 0) {
          vertex_normals[faces[f][k]] = normals[face_normals[f][k]];
          seen[faces[f][k]] = true;
        }
      }
    }
    bool all_seen = true;
    for (size_t i = 0; i < positions.size(); ++i) {
      if (!seen[i]) all_seen = false;
    }
    if (!all_seen) vertex_normals.clear();  // partial normals are unusable
    for (Vec3& n : vertex_normals) {
      const double len = n.norm();
      if (len > 0) n /= len;
    }
  }

  return TriangleMesh(std::move(positions), std::move(faces),
                      std::move(vertex_normals));
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write OBJ file: " + path.string());
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) {
    out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  }
  const bool vn = mesh.has_vertex_normals();
  if (vn) {
    for (const Vec3& n : mesh.vertex_normals()) {
      out << "vn " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
    }
  }
  for (const auto& tri : mesh.triangles()) {
    if (vn) {
      out << "f " << tri[0] + 1 << "//" << tri[0] + 1 << ' ' << tri[1] + 1
          << "//" << tri[1] + 1 << ' ' << tri[2] + 1 << "//" << tri[2] + 1
          << '\n';
    } else {
      out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1
          << '\n';
    }
  }
  if (!out) throw IoError("failed writing OBJ file: " + path.string());
}

void write_ply(const std::filesystem::path& path,
               const OrientedPointCloud& cloud) {
  if (cloud.has_normals() && cloud.normals.size() != cloud.positions.size()) {
    throw ValidationError("point cloud normal count mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file: " + path.string());

  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.positions.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_normals()) {
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  out << "end_header\n";

  std::vector<float> row(cloud.has_normals() ? 6 : 3);
  for (size_t i = 0; i < cloud.positions.size(); ++i) {
    row[0] = float(cloud.positions[i][0]);
    row[1] = float(cloud.positions[i][1]);
    row[2] = float(cloud.positions[i][2]);
    if (cloud.has_normals()) {
      row[3] = float(cloud.normals[i][0]);
      row[4] = float(cloud.normals[i][1]);
      row[5] = float(cloud.normals[i][2]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing PLY file: " + path.string());
}

OrientedPointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw IoError(path.string() + ": not a PLY file");
  }

  size_t vertex_count = 0;
  std::vector<std::string> properties;
  bool binary_le = false;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      binary_le = (fmt == "binary_little_endian");
      if (!binary_le) {
        throw IoError(path.string() + ": unsupported PLY format " + fmt);
      }
    } else if (tag == "element") {
      std::string name;
      size_t count;
      ss >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
    } else if (tag == "property" && in_vertex_element) {
      std::string type, name;
      ss >> type >> name;
      if (type != "float" && type != "float32") {
        throw IoError(path.string() + ": unsupported vertex property type " +
                      type);
      }
      properties.push_back(name);
    } else if (tag == "end_header") {
      break;
    }
  }

  int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
  for (size_t i = 0; i < properties.size(); ++i) {
    if (properties[i] == "x") ix = int(i);
    else if (properties[i] == "y") iy = int(i);
    else if (properties[i] == "z") iz = int(i);
    else if (properties[i] == "nx") inx = int(i);
    else if (properties[i] == "ny") iny = int(i);
    else if (properties[i] == "nz") inz = int(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw IoError(path.string() + ": PLY vertex element lacks x/y/z");
  }
  const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

  OrientedPointCloud cloud;
  cloud.positions.resize(vertex_count);
  if (has_normals) cloud.normals.resize(vertex_count);

  std::vector<float> row(properties.size());
  for (size_t i = 0; i < vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            std::streamsize(row.size() * sizeof(float)));
    if (!in) throw IoError(path.string() + ": truncated PLY payload");
    cloud.positions[i] = Vec3(row[ix], row[iy], row[iz]);
    if (has_normals) cloud.normals[i] = Vec3(row[inx], row[iny], row[inz]);
  }
  return cloud;
}

}  // namespace mvf

#include "mvf/maps_io.h"

#include <fstream>
#include <sstream>

#include "mvf/errors.h"

namespace mvf {

namespace {

void read_pfm_header(std::ifstream& in, const std::string& path,
                     const std::string& magic_want, int* width, int* height) {
  std::string magic;
  in >> magic;
  if (magic != magic_want) {
    throw IoError(path + ": expected PFM magic " + magic_want + ", got '" +
                  magic + "'");
  }
  double scale;
  in >> *width >> *height >> scale;
  if (!in || *width <= 0 || *height <= 0) {
    throw IoError(path + ": malformed PFM header");
  }
  if (scale >= 0.0) {
    throw IoError(path + ": big-endian PFM not supported (scale must be < 0)");
  }
  in.get();  // single whitespace byte after the scale
}

template <typename T>
void read_payload(std::ifstream& in, const std::string& path,
                  std::vector<T>& data) {
  in.read(reinterpret_cast<char*>(data.data()),
          std::streamsize(data.size() * sizeof(T)));
  if (!in) throw IoError(path + ": truncated payload");
}

}  // namespace

Image<float> read_pfm_gray(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  int w, h;
  read_pfm_header(in, path.string(), "Pf", &w, &h);
  Image<float> img(w, h);
  // PFM rows run bottom-to-top; so does the in-memory layout.
  read_payload(in, path.string(), img.data());
  return img;
}

void write_pfm_gray(const std::filesystem::path& path, const Image<float>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << "Pf\n" << img.width() << ' ' << img.height() << "\n-1.0\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            std::streamsize(img.data().size() * sizeof(float)));
  if (!out) throw IoError("failed writing: " + path.string());
}

Image<Eigen::Vector3f> read_pfm_rgb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  int w, h;
  read_pfm_header(in, path.string(), "PF", &w, &h);
  Image<Eigen::Vector3f> img(w, h);
  read_payload(in, path.string(), img.data());
  return img;
}

void write_pfm_rgb(const std::filesystem::path& path,
                   const Image<Eigen::Vector3f>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << "PF\n" << img.width() << ' ' << img.height() << "\n-1.0\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            std::streamsize(img.data().size() * sizeof(Eigen::Vector3f)));
  if (!out) throw IoError("failed writing: " + path.string());
}

Image<uint8_t> read_pgm_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") {
    throw IoError(path.string() + ": expected P5 PGM, got '" + magic + "'");
  }
  // Header tokens may be separated by whitespace or # comments.
  auto next_int = [&](int* value) {
    std::string token;
    while (in >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      *value = std::stoi(token);
      return;
    }
    throw IoError(path.string() + ": malformed PGM header");
  };
  int w, h, maxval;
  next_int(&w);
  next_int(&h);
  next_int(&maxval);
  if (w <= 0 || h <= 0) throw IoError(path.string() + ": malformed PGM header");
  if (maxval != 255) {
    throw IoError(path.string() + ": PGM maxval must be 255");
  }
  in.get();

  std::vector<uint8_t> raw(size_t(w) * h);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) throw IoError(path.string() + ": truncated payload");

  Image<uint8_t> mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // PGM rows are top-to-bottom; flip into bottom-up storage.
      const uint8_t value = raw[size_t(h - 1 - y) * w + x];
      if (value == 255) {
        mask.at(x, y) = 1;
      } else if (value == 0) {
        mask.at(x, y) = 0;
      } else {
        throw IoError(path.string() + ": mask value " + std::to_string(value) +
                      " is neither 0 nor 255");
      }
    }
  }
  return mask;
}

void write_pgm_mask(const std::filesystem::path& path,
                    const Image<uint8_t>& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path.string());
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::vector<uint8_t> raw(size_t(mask.width()) * mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      raw[size_t(mask.height() - 1 - y) * mask.width() + x] =
          mask.at(x, y) ? 255 : 0;
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            std::streamsize(raw.size()));
  if (!out) throw IoError("failed writing: " + path.string());
}

MapSet read_mapset(const std::filesystem::path& directory) {
  const auto rig_path = directory / "rig.json";
  if (!std::filesystem::exists(rig_path)) {
    throw IoError("mapset directory lacks rig.json: " + directory.string());
  }

  MapSet m;
  m.rig = read_rig_json(rig_path);
  m.views.resize(m.rig.view_count());

  for (int v = 0; v < m.rig.view_count(); ++v) {
    const auto depth_path = directory / ("depth_" + std::to_string(v) + ".pfm");
    const auto normal_path = directory / ("normal_" + std::to_string(v) + ".pfm");
    const auto mask_path = directory / ("mask_" + std::to_string(v) + ".pgm");
    for (const auto& p : {depth_path, normal_path, mask_path}) {
      if (!std::filesystem::exists(p)) {
        throw IoError("view " + std::to_string(v) +
                      " is missing map file: " + p.string());
      }
    }
    m.views[v].depth = read_pfm_gray(depth_path);
    m.views[v].normal = read_pfm_rgb(normal_path);
    m.views[v].mask = read_pgm_mask(mask_path);

    const auto bad_dims = [&](int w, int h) {
      return w != m.rig.width() || h != m.rig.height();
    };
    if (bad_dims(m.views[v].depth.width(), m.views[v].depth.height()) ||
        bad_dims(m.views[v].normal.width(), m.views[v].normal.height()) ||
        bad_dims(m.views[v].mask.width(), m.views[v].mask.height())) {
      throw IoError("view " + std::to_string(v) +
                    " map dimensions do not match the rig manifest");
    }
  }

  const auto violations = validate_mapset(m);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ValidationError(
        "mapset fails validation (" + std::to_string(violations.size()) +
        " violation(s)); first: view " + std::to_string(v.view) + " pixel (" +
        std::to_string(v.x) + ", " + std::to_string(v.y) + ") rule " + v.rule +
        ": " + v.detail);
  }
  return m;
}

void write_mapset(const std::filesystem::path& directory, const MapSet& m) {
  std::filesystem::create_directories(directory);
  write_rig_json(directory / "rig.json", m.rig);
  for (int v = 0; v < int(m.views.size()); ++v) {
    write_pfm_gray(directory / ("depth_" + std::to_string(v) + ".pfm"),
                   m.views[v].depth);
    write_pfm_rgb(directory / ("normal_" + std::to_string(v) + ".pfm"),
                  m.views[v].normal);
    write_pgm_mask(directory / ("mask_" + std::to_string(v) + ".pgm"),
                   m.views[v].mask);
  }
}

}  // namespace mvf

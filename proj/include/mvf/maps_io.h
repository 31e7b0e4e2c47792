#pragma once

#include <filesystem>

#include "mvf/maps.h"

namespace mvf {

// On-disk layout of a MapSet directory:
//   rig.json                          camera manifest
//   depth_<v>.pfm                     PFM "Pf", float32 LE, scale -1.0
//   normal_<v>.pfm                    PFM "PF", 3 channels, same conventions
//   mask_<v>.pgm                      binary P5, maxval 255, 255 = foreground
// View indices are zero-based with no padding. PFM rows are stored
// bottom-to-top, which matches the in-memory row order directly; PGM rows
// are top-to-bottom per convention.

// Loads and validates; throws IoError naming the offending file or
// ValidationError naming view/pixel/rule.
MapSet read_mapset(const std::filesystem::path& directory);

void write_mapset(const std::filesystem::path& directory, const MapSet& m);

// Single-image helpers (exposed for tests and tools).
Image<float> read_pfm_gray(const std::filesystem::path& path);
void write_pfm_gray(const std::filesystem::path& path, const Image<float>& img);
Image<Eigen::Vector3f> read_pfm_rgb(const std::filesystem::path& path);
void write_pfm_rgb(const std::filesystem::path& path,
                   const Image<Eigen::Vector3f>& img);
Image<uint8_t> read_pgm_mask(const std::filesystem::path& path);
void write_pgm_mask(const std::filesystem::path& path,
                    const Image<uint8_t>& mask);

}  // namespace mvf

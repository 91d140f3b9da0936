#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pcgk/geometry/point_cloud.hpp"

namespace pcgk::dataorg {

enum class PlyEncoding { ascii, binary_le };

/// Reads PLY (ascii or binary little-endian) or OFF, chosen by extension.
/// Only vertex x,y,z are kept; other vertex properties and elements are skipped.
/// Throws DataError naming the line (header/ascii) or byte offset (binary).
geometry::PointCloud load_cloud(const std::filesystem::path& path);

/// Writes PLY or OFF by extension. Coordinates are stored as float32. A label,
/// if present, travels in a "comment label N" header line.
void save_cloud(const geometry::PointCloud& cloud, const std::filesystem::path& path,
                PlyEncoding encoding = PlyEncoding::binary_le);

struct ManifestEntry {
    std::filesystem::path path;
    int label = 0;
};

/// CSV with header "path,label"; relative paths resolve against the manifest directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries);

/// Loads every cloud of a manifest and attaches its label.
std::vector<geometry::PointCloud> load_dataset(const std::filesystem::path& manifest);

/// Writes cloud_NNNN.ply files and manifest.csv into `dir`. Clouds must carry labels.
void save_dataset(const std::vector<geometry::PointCloud>& clouds, const std::filesystem::path& dir);

}  // namespace pcgk::dataorg

#pragma once

#include <filesystem>

#include "pcgk/render/image.hpp"

namespace pcgk::render {

/// 8-bit binary PGM (P5); values are rounded to the nearest of 256 levels. Grayscale only.
void write_pgm(const ImageGrid& img, const std::filesystem::path& path);
/// Reads P5 (8- or 16-bit) and P2 files. Throws DataError on malformed input.
ImageGrid read_pgm(const std::filesystem::path& path);

/// 8-bit grayscale or RGB PNG.
void write_png(const ImageGrid& img, const std::filesystem::path& path);

/// Chooses PNG or PGM from the extension.
void write_image(const ImageGrid& img, const std::filesystem::path& path);

}  // namespace pcgk::render

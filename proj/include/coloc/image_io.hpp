#pragma once

#include <filesystem>

#include "coloc/grid.hpp"

namespace coloc {

/// Binary netpbm only: P6 (RGB) or P5 (gray, replicated to RGB), maxval 255.
RgbImage read_pnm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// 8-bit grayscale dump of a [0,1] map; each pixel is round(255 * v).
void write_pgm(const std::filesystem::path& path, const ScalarMap& map);

}  // namespace coloc

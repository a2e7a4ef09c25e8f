#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coloc/grid.hpp"

namespace coloc {

struct RegionCentroid {
  double x = 0.0;
  double y = 0.0;
  double lab[3] = {0.0, 0.0, 0.0};
};

struct SuperpixelLabeling {
  LabelMap labels;  // ids contiguous in [0, count)
  std::size_t count = 0;
  std::vector<RegionCentroid> centroids;
};

struct SlicParams {
  std::size_t target_count = 300;
  double compactness = 10.0;
  int iterations = 10;
};

/// SLIC oversegmentation in CIELAB followed by a connectivity pass that
/// merges orphan fragments into the colour-nearest adjacent region.
SuperpixelLabeling segment(const RgbImage& image, const SlicParams& params = {});

/// Mean of `values` over each region.
std::vector<double> region_mean(const SuperpixelLabeling& labeling, const ScalarMap& values);

std::vector<std::size_t> region_sizes(const SuperpixelLabeling& labeling);

/// Half-pixel-centre (align_corners = false) bilinear resize.
ScalarMap upsample_bilinear(const ScalarMap& grid, std::size_t out_height, std::size_t out_width);

/// sRGB (8 bit) to CIELAB under D65.
void rgb_to_lab(const Rgb& rgb, double lab[3]);

}  // namespace coloc

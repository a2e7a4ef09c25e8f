#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coloc/ccf.hpp"
#include "coloc/grid.hpp"
#include "coloc/superpixel.hpp"
#include "coloc/tensor_store.hpp"

namespace coloc {

/// Row-stochastic W with W(i, j) proportional to exp(-dist(i, j) / mu).
/// Unreachable pairs contribute zero.
Matrix build_propagation_matrix(const Matrix& dist, double mu);

/// E' = W E.
std::vector<double> propagate(const Matrix& weights, std::span<const double> energy);

struct LikelihoodMap {
  ScalarMap map;  // values in [0, 1], max 1 unless degenerate
  bool degenerate = false;
};

/// Paints each pixel with its region's energy and divides by the maximum.
LikelihoodMap rasterize_and_normalize(std::span<const double> energy, const SuperpixelLabeling& labeling);

struct RegionSelection {
  Mask mask;  // map >= threshold
  std::optional<Box> box;
};

/// Tight box around every above-threshold pixel, or with `largest_component`
/// around the largest 4-connected above-threshold component only.
RegionSelection threshold_and_box(const ScalarMap& likelihood, double threshold, bool largest_component = false);

struct LocalizeParams {
  double mu = 1.0;
  double threshold = 0.25;
  std::size_t target_count = 300;
  double compactness = 10.0;
  bool propagation_enabled = true;
  bool largest_component = false;
  std::size_t graph_workers = 1;

  void validate() const;
};

/// Everything one image contributes to localization, already decoded.
struct ImageInputs {
  std::string id;
  RgbImage image;
  FeatureStack features;
  ScalarMap boundary;
};

/// Reads and cross-checks an entry's image, feature stack and boundary map.
ImageInputs load_image_inputs(const ImageEntry& entry);

struct LocalizationResult {
  std::string id;
  ScalarMap likelihood;
  Mask region_mask;
  std::optional<Box> pred_box;
  bool degenerate = false;
  SuperpixelLabeling labeling;
  std::vector<double> energy;             // E
  std::vector<double> propagated_energy;  // E' (== E without propagation)
};

LocalizationResult localize_image(const ImageInputs& inputs, std::span<const std::size_t> ccf_kernels,
                                  const LocalizeParams& params);

}  // namespace coloc

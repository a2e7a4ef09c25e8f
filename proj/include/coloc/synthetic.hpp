#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coloc/propagation.hpp"
#include "coloc/tensor_store.hpp"

namespace coloc {

// Planted-object fixtures. Each image holds one rectangular object of a
// distinct colour, outlined by a ring of boundary value 1 over low boundary
// noise. Kernels come in five groups with well separated peak levels so that
// k-means with k = 5 recovers them:
//   group 0  peak ~9  blob inside the object (the planted CCFs)
//   group 1  peak ~7  blob inside the object at a random cell
//   group 2  peak ~5  inside the object on even images, background on odd
//   group 3  peak ~3  background
//   group 4  peak ~1  background

inline constexpr std::size_t kSyntheticGroups = 5;

enum class PlantedCoverage {
  Centered,  // group 0 blob centred in the object
  Partial,   // group 0 blob confined to one corner of the object
};

struct SyntheticOptions {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t feature_stride = 8;
  std::size_t kernels_per_group = 8;
  std::size_t object_min = 32;
  std::size_t object_max = 52;
  PlantedCoverage coverage = PlantedCoverage::Centered;
  double boundary_noise_min = 0.01;
  double boundary_noise_max = 0.05;
};

struct SyntheticImage {
  ImageInputs inputs;
  Box object;
};

struct SyntheticDataset {
  std::string class_name;
  std::vector<SyntheticImage> images;
  /// Kernel ids of each group; group 0 is the planted CCF set.
  std::array<std::vector<std::size_t>, kSyntheticGroups> groups;
};

SyntheticDataset make_synthetic_dataset(const std::string& class_name, std::size_t n_images,
                                        const SyntheticOptions& options, std::uint64_t seed);

/// Writes images (PPM), feature and boundary tensors and manifest.json under
/// `dir`; returns the manifest path.
std::filesystem::path write_synthetic_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace coloc

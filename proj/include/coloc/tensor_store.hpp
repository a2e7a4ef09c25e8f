#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coloc/grid.hpp"

namespace coloc {

// .ccft layout: "CCFT" | version u8 | dtype u8 | ndim u8 | pad u8 |
// ndim x u32 LE extents | row-major float32 LE payload.
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kTensorDtypeFloat32 = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const noexcept;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Throws DimMismatch / NonFiniteValue when the tensor violates the
/// container invariants.
void validate(const Tensor& tensor);

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

Tensor tensor_from_map(const ScalarMap& map);
/// Requires a rank-2 tensor.
ScalarMap map_from_tensor(const Tensor& tensor);

/// Half-open pixel box: [xmin, xmax) x [ymin, ymax).
struct Box {
  std::int64_t xmin = 0;
  std::int64_t ymin = 0;
  std::int64_t xmax = 0;
  std::int64_t ymax = 0;

  std::int64_t width() const noexcept { return xmax - xmin; }
  std::int64_t height() const noexcept { return ymax - ymin; }
  std::int64_t area() const noexcept { return width() * height(); }
  bool valid() const noexcept { return xmin < xmax && ymin < ymax; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct ImageEntry {
  std::string id;
  std::filesystem::path image_path;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::filesystem::path features_path;
  std::filesystem::path boundary_path;
  std::vector<Box> gt_boxes;
};

struct DatasetManifest {
  std::string class_name;
  std::vector<ImageEntry> images;

  /// nullptr when absent.
  const ImageEntry* find(const std::string& id) const;
};

/// Parses and validates a manifest; relative paths are resolved against the
/// manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Per-kernel feature maps of one image, dims [kernels, height, width].
class FeatureStack {
 public:
  FeatureStack() = default;
  explicit FeatureStack(Tensor tensor);

  std::size_t kernels() const noexcept { return kernels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  std::span<const float> kernel_map(std::size_t kernel) const;

 private:
  std::size_t kernels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> values_;
};

}  // namespace coloc

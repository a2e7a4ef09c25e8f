#include "coloc/tensor_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "coloc/error.hpp"

namespace coloc {
namespace {

constexpr std::size_t kHeaderSize = 8;
constexpr char kMagic[4] = {'C', 'C', 'F', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  }
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

std::size_t Tensor::element_count() const noexcept {
  if (dims.empty()) return 0;
  std::size_t count = 1;
  for (auto d : dims) count *= d;
  return count;
}

void validate(const Tensor& tensor) {
  if (tensor.dims.empty()) fail(ErrorCode::DimMismatch, "tensor has no dimensions");
  if (tensor.dims.size() > 255) fail(ErrorCode::DimMismatch, "tensor rank exceeds 255");
  for (auto d : tensor.dims) {
    if (d == 0) fail(ErrorCode::DimMismatch, "tensor extent must be >= 1");
  }
  if (tensor.values.size() != tensor.element_count()) {
    fail(ErrorCode::DimMismatch, "payload has " + std::to_string(tensor.values.size()) +
                                     " values, dims require " +
                                     std::to_string(tensor.element_count()));
  }
  for (float v : tensor.values) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "tensor contains NaN or Inf");
  }
}

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  validate(tensor);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * tensor.dims.size() + 4 * tensor.values.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kTensorVersion);
  out.push_back(kTensorDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  out.push_back(0);
  for (auto d : tensor.dims) put_u32(out, d);
  for (float v : tensor.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    fail(ErrorCode::BadMagic, "missing CCFT magic");
  }
  if (bytes.size() < kHeaderSize) fail(ErrorCode::DimMismatch, "truncated header");
  if (bytes[4] != kTensorVersion) {
    fail(ErrorCode::UnsupportedVersion, "version " + std::to_string(bytes[4]));
  }
  if (bytes[5] != kTensorDtypeFloat32) {
    fail(ErrorCode::UnsupportedVersion, "dtype " + std::to_string(bytes[5]));
  }
  if (bytes[7] != 0) fail(ErrorCode::UnsupportedVersion, "nonzero header pad byte");

  const std::size_t ndim = bytes[6];
  if (bytes.size() < kHeaderSize + 4 * ndim) fail(ErrorCode::DimMismatch, "truncated extents");

  Tensor tensor;
  tensor.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) tensor.dims[i] = get_u32(bytes, kHeaderSize + 4 * i);

  const std::size_t offset = kHeaderSize + 4 * ndim;
  const std::size_t payload = bytes.size() - offset;
  if (payload % 4 != 0) fail(ErrorCode::DimMismatch, "payload is not a whole number of floats");
  tensor.values.resize(payload / 4);
  for (std::size_t i = 0; i < tensor.values.size(); ++i) {
    tensor.values[i] = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
  }
  validate(tensor);
  return tensor;
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingFile, path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Tensor tensor_from_map(const ScalarMap& map) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(map.height()), static_cast<std::uint32_t>(map.width())};
  t.values.reserve(map.size());
  for (double v : map.values()) t.values.push_back(static_cast<float>(v));
  return t;
}

ScalarMap map_from_tensor(const Tensor& tensor) {
  if (tensor.dims.size() != 2) fail(ErrorCode::DimMismatch, "expected a rank-2 tensor");
  ScalarMap map(tensor.dims[0], tensor.dims[1]);
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = tensor.values[i];
  return map;
}

const ImageEntry* DatasetManifest::find(const std::string& id) const {
  for (const auto& entry : images) {
    if (entry.id == id) return &entry;
  }
  return nullptr;
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  try {
    const auto doc = nlohmann::json::parse(text);
    manifest.class_name = doc.at("class_name").get<std::string>();
    for (const auto& item : doc.at("images")) {
      ImageEntry entry;
      entry.id = item.at("id").get<std::string>();
      entry.image_path = resolve(base_dir, item.at("image_path").get<std::string>());
      const auto width = item.at("width").get<std::int64_t>();
      const auto height = item.at("height").get<std::int64_t>();
      if (width < 1 || height < 1 || width > UINT32_MAX || height > UINT32_MAX) {
        fail(ErrorCode::ParseError, "image '" + entry.id + "' has invalid size");
      }
      entry.width = static_cast<std::uint32_t>(width);
      entry.height = static_cast<std::uint32_t>(height);
      entry.features_path = resolve(base_dir, item.at("features_path").get<std::string>());
      entry.boundary_path = resolve(base_dir, item.at("boundary_path").get<std::string>());
      for (const auto& b : item.at("gt_boxes")) {
        if (!b.is_array() || b.size() != 4) fail(ErrorCode::ParseError, "gt box must have 4 entries");
        entry.gt_boxes.push_back({b[0].get<std::int64_t>(), b[1].get<std::int64_t>(),
                                  b[2].get<std::int64_t>(), b[3].get<std::int64_t>()});
      }
      manifest.images.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }

  std::unordered_set<std::string> seen;
  for (const auto& entry : manifest.images) {
    if (!seen.insert(entry.id).second) fail(ErrorCode::DuplicateImageId, entry.id);
    for (const auto& box : entry.gt_boxes) {
      if (!box.valid()) fail(ErrorCode::ParseError, "degenerate gt box in '" + entry.id + "'");
      if (box.xmin < 0 || box.ymin < 0 || box.xmax > entry.width || box.ymax > entry.height) {
        fail(ErrorCode::BoxOutOfBounds, "gt box outside image '" + entry.id + "'");
      }
    }
    for (const auto* p : {&entry.image_path, &entry.features_path, &entry.boundary_path}) {
      if (!std::filesystem::exists(*p)) fail(ErrorCode::MissingFile, p->string());
    }
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["class_name"] = manifest.class_name;
  doc["images"] = nlohmann::ordered_json::array();
  const auto base = path.parent_path();
  for (const auto& entry : manifest.images) {
    nlohmann::ordered_json item;
    item["id"] = entry.id;
    item["image_path"] = entry.image_path.lexically_proximate(base).generic_string();
    item["width"] = entry.width;
    item["height"] = entry.height;
    item["features_path"] = entry.features_path.lexically_proximate(base).generic_string();
    item["boundary_path"] = entry.boundary_path.lexically_proximate(base).generic_string();
    auto boxes = nlohmann::ordered_json::array();
    for (const auto& b : entry.gt_boxes) boxes.push_back({b.xmin, b.ymin, b.xmax, b.ymax});
    item["gt_boxes"] = std::move(boxes);
    doc["images"].push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

FeatureStack::FeatureStack(Tensor tensor) {
  if (tensor.dims.size() != 3) fail(ErrorCode::DimMismatch, "feature stack must be rank 3 [m, h, w]");
  kernels_ = tensor.dims[0];
  height_ = tensor.dims[1];
  width_ = tensor.dims[2];
  values_ = std::move(tensor.values);
}

std::span<const float> FeatureStack::kernel_map(std::size_t kernel) const {
  const std::size_t plane = height_ * width_;
  return {values_.data() + kernel * plane, plane};
}

}  // namespace coloc

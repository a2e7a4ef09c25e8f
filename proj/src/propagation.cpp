#include "coloc/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "coloc/error.hpp"
#include "coloc/geodesic_graph.hpp"
#include "coloc/image_io.hpp"

namespace coloc {

Matrix build_propagation_matrix(const Matrix& dist, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) fail(ErrorCode::NonPositiveMu, "mu must be a positive finite value");
  if (dist.height() != dist.width()) fail(ErrorCode::DimMismatch, "distance matrix must be square");
  const std::size_t n = dist.height();
  Matrix w(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist(i, j);
      const double e = d == kUnreachable ? 0.0 : std::exp(-d / mu);
      w(i, j) = e;
      total += e;
    }
    // The diagonal distance is 0, so total >= 1.
    for (auto& v : w.row(i)) v /= total;
  }
  return w;
}

std::vector<double> propagate(const Matrix& weights, std::span<const double> energy) {
  if (weights.width() != energy.size()) fail(ErrorCode::DimMismatch, "W columns must match E length");
  std::vector<double> out(weights.height(), 0.0);
  for (std::size_t i = 0; i < weights.height(); ++i) {
    const auto row = weights.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * energy[j];
    out[i] = acc;
  }
  return out;
}

LikelihoodMap rasterize_and_normalize(std::span<const double> energy, const SuperpixelLabeling& labeling) {
  if (energy.size() != labeling.count) fail(ErrorCode::DimMismatch, "energy length must equal region count");
  LikelihoodMap out;
  out.map = ScalarMap(labeling.labels.height(), labeling.labels.width(), 0.0);
  const double peak = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  if (!(peak > 0.0)) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t p = 0; p < out.map.size(); ++p) {
    out.map[p] = energy[static_cast<std::size_t>(labeling.labels[p])] / peak;
  }
  return out;
}

namespace {

std::optional<Box> bounding_box(const Mask& mask) {
  std::optional<Box> box;
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (!mask(y, x)) continue;
      const auto xi = static_cast<std::int64_t>(x), yi = static_cast<std::int64_t>(y);
      if (!box) {
        box = Box{xi, yi, xi + 1, yi + 1};
      } else {
        box->xmin = std::min(box->xmin, xi);
        box->ymin = std::min(box->ymin, yi);
        box->xmax = std::max(box->xmax, xi + 1);
        box->ymax = std::max(box->ymax, yi + 1);
      }
    }
  }
  return box;
}

Mask largest_component_of(const Mask& mask) {
  const std::size_t h = mask.height(), w = mask.width();
  Grid<std::int32_t> component(h, w, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || component[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(sizes.size());
    std::size_t size = 0;
    component[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++size;
      const std::size_t y = p / w, x = p % w;
      const auto visit = [&](std::size_t q) {
        if (mask[q] && component[q] < 0) {
          component[q] = id;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    sizes.push_back(size);
  }
  Mask out(h, w, 0);
  if (sizes.empty()) return out;
  const auto keep = static_cast<std::int32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = component[p] == keep ? 1 : 0;
  return out;
}

}  // namespace

RegionSelection threshold_and_box(const ScalarMap& likelihood, double threshold, bool largest_component) {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1]");
  RegionSelection out;
  out.mask = Mask(likelihood.height(), likelihood.width(), 0);
  for (std::size_t p = 0; p < likelihood.size(); ++p) out.mask[p] = likelihood[p] >= threshold ? 1 : 0;
  out.box = bounding_box(largest_component ? largest_component_of(out.mask) : out.mask);
  return out;
}

void LocalizeParams::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) fail(ErrorCode::NonPositiveMu, "mu must be a positive finite value");
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1]");
  if (target_count < 1) fail(ErrorCode::InvalidArgument, "superpixel target must be >= 1");
  if (!(compactness > 0.0)) fail(ErrorCode::InvalidArgument, "compactness must be > 0");
}

ImageInputs load_image_inputs(const ImageEntry& entry) {
  ImageInputs inputs;
  inputs.id = entry.id;
  inputs.image = read_pnm(entry.image_path);
  if (inputs.image.width() != entry.width || inputs.image.height() != entry.height) {
    fail(ErrorCode::DimMismatch, entry.id + ": image size differs from manifest");
  }
  inputs.features = FeatureStack(load_tensor(entry.features_path));
  const auto boundary = load_tensor(entry.boundary_path);
  if (boundary.dims.size() != 2 || boundary.dims[0] != entry.height || boundary.dims[1] != entry.width) {
    fail(ErrorCode::DimMismatch, entry.id + ": boundary map must be [height, width]");
  }
  inputs.boundary = map_from_tensor(boundary);
  return inputs;
}

LocalizationResult localize_image(const ImageInputs& inputs, std::span<const std::size_t> ccf_kernels,
                                  const LocalizeParams& params) {
  params.validate();
  const std::size_t h = inputs.image.height(), w = inputs.image.width();
  if (!inputs.boundary.empty() && (inputs.boundary.height() != h || inputs.boundary.width() != w)) {
    fail(ErrorCode::DimMismatch, inputs.id + ": boundary map must match the image");
  }

  LocalizationResult result;
  result.id = inputs.id;
  const auto activation = combined_activation_map(inputs.features, ccf_kernels);
  if (activation.degenerate) {
    result.degenerate = true;
    result.likelihood = ScalarMap(h, w, 0.0);
    result.region_mask = Mask(h, w, 0);
    return result;
  }

  const auto upsampled = upsample_bilinear(activation.grid, h, w);
  result.labeling = segment(inputs.image, {params.target_count, params.compactness});
  result.energy = region_mean(result.labeling, upsampled);

  if (params.propagation_enabled) {
    const auto graph = build_graph(result.labeling, inputs.boundary);
    const auto dist = all_pairs_geodesic(graph, params.graph_workers);
    result.propagated_energy = propagate(build_propagation_matrix(dist, params.mu), result.energy);
  } else {
    result.propagated_energy = result.energy;
  }

  auto likelihood = rasterize_and_normalize(result.propagated_energy, result.labeling);
  auto selection = threshold_and_box(likelihood.map, params.threshold, params.largest_component);
  result.likelihood = std::move(likelihood.map);
  result.region_mask = std::move(selection.mask);
  result.degenerate = likelihood.degenerate;
  if (!result.degenerate) result.pred_box = selection.box;
  return result;
}

}  // namespace coloc

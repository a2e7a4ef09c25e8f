#include "coloc/superpixel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "coloc/error.hpp"

namespace coloc {
namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

struct Center {
  double l, a, b, x, y;
};

struct Component {
  std::int32_t label;
  std::vector<std::size_t> pixels;
};

constexpr std::int32_t kUnassigned = -1;

// 4-connected components of equal label, in raster order of first pixel.
std::vector<Component> connected_components(const LabelMap& labels) {
  const std::size_t h = labels.height(), w = labels.width();
  std::vector<std::uint8_t> visited(labels.size(), 0);
  std::vector<Component> components;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (visited[start]) continue;
    Component comp{labels[start], {}};
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      comp.pixels.push_back(p);
      const std::size_t y = p / w, x = p % w;
      const auto visit = [&](std::size_t q) {
        if (!visited[q] && labels[q] == comp.label) {
          visited[q] = 1;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
    }
    components.push_back(std::move(comp));
  }
  return components;
}

using LabImage = std::vector<std::array<double, 3>>;

double color_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
  return d;
}

// Orphan fragments (every piece of a label except its largest, plus pixels no
// centre claimed) join the adjacent region with the closest mean colour, so
// a fragment never bridges a colour edge. Ties go to the larger region, then
// the lower id.
void enforce_connectivity(LabelMap& labels, std::size_t label_count, const LabImage& lab) {
  const std::size_t w = labels.width(), h = labels.height();
  auto components = connected_components(labels);

  std::vector<std::size_t> keeper(label_count, components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto label = components[c].label;
    if (label == kUnassigned) continue;
    auto& k = keeper[static_cast<std::size_t>(label)];
    if (k == components.size() || components[c].pixels.size() > components[k].pixels.size()) k = c;
  }

  struct RegionStats {
    std::size_t size = 0;
    std::array<double, 3> sum{0.0, 0.0, 0.0};
    std::array<double, 3> mean() const {
      const double n = static_cast<double>(size);
      return {sum[0] / n, sum[1] / n, sum[2] / n};
    }
    void add(const std::vector<std::size_t>& pixels, const LabImage& lab) {
      size += pixels.size();
      for (auto p : pixels) {
        for (int ch = 0; ch < 3; ++ch) sum[ch] += lab[p][ch];
      }
    }
  };
  std::vector<RegionStats> regions(label_count);
  std::vector<std::size_t> orphans;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto label = components[c].label;
    if (label != kUnassigned && keeper[static_cast<std::size_t>(label)] == c) {
      regions[static_cast<std::size_t>(label)].add(components[c].pixels, lab);
    } else {
      for (auto p : components[c].pixels) labels[p] = kUnassigned;
      orphans.push_back(c);
    }
  }

  while (!orphans.empty()) {
    std::vector<std::size_t> pending;
    for (auto c : orphans) {
      RegionStats fragment;
      fragment.add(components[c].pixels, lab);
      const auto color = fragment.mean();

      std::int32_t best = kUnassigned;
      double best_d = 0.0;
      const auto consider = [&](std::int32_t l) {
        if (l == kUnassigned || l == best) return;
        const auto& r = regions[static_cast<std::size_t>(l)];
        const double d = color_distance(color, r.mean());
        if (best == kUnassigned || d < best_d) {
          best = l;
          best_d = d;
          return;
        }
        const auto& b = regions[static_cast<std::size_t>(best)];
        if (d == best_d && (r.size > b.size || (r.size == b.size && l < best))) best = l;
      };
      for (auto p : components[c].pixels) {
        const std::size_t y = p / w, x = p % w;
        if (x > 0) consider(labels[p - 1]);
        if (x + 1 < w) consider(labels[p + 1]);
        if (y > 0) consider(labels[p - w]);
        if (y + 1 < h) consider(labels[p + w]);
      }
      if (best == kUnassigned) {
        pending.push_back(c);
        continue;
      }
      for (auto p : components[c].pixels) labels[p] = best;
      regions[static_cast<std::size_t>(best)].add(components[c].pixels, lab);
    }
    if (pending.size() == orphans.size()) fail(ErrorCode::InvalidArgument, "image has no labelled region");
    orphans = std::move(pending);
  }
}

std::size_t relabel_contiguous(LabelMap& labels) {
  std::map<std::int32_t, std::int32_t> remap;
  for (auto& l : labels.values()) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<std::int32_t>(remap.size()));
    l = it->second;
  }
  return remap.size();
}

}  // namespace

void rgb_to_lab(const Rgb& rgb, double lab[3]) {
  const double r = srgb_to_linear(rgb.r / 255.0);
  const double g = srgb_to_linear(rgb.g / 255.0);
  const double b = srgb_to_linear(rgb.b / 255.0);
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  const double fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
  lab[0] = 116.0 * fy - 16.0;
  lab[1] = 500.0 * (fx - fy);
  lab[2] = 200.0 * (fy - fz);
}

SuperpixelLabeling segment(const RgbImage& image, const SlicParams& params) {
  if (image.empty()) fail(ErrorCode::InvalidArgument, "empty image");
  if (params.target_count < 1) fail(ErrorCode::InvalidArgument, "target_count must be >= 1");
  if (!(params.compactness > 0.0)) fail(ErrorCode::InvalidArgument, "compactness must be > 0");
  const std::size_t h = image.height(), w = image.width();
  const std::size_t n_pixels = image.size();
  if (n_pixels < params.target_count) {
    fail(ErrorCode::ImageTooSmall, std::to_string(n_pixels) + " pixels for " +
                                       std::to_string(params.target_count) + " superpixels");
  }

  LabImage lab(n_pixels);
  for (std::size_t p = 0; p < n_pixels; ++p) rgb_to_lab(image[p], lab[p].data());

  const double k = static_cast<double>(params.target_count);
  const double step = std::sqrt(static_cast<double>(n_pixels) / k);
  const auto rows = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(std::sqrt(k * static_cast<double>(h) / static_cast<double>(w)))), 1, h);
  const auto cols = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(k / static_cast<double>(rows))), 1, w);
  const double cell_h = static_cast<double>(h) / static_cast<double>(rows);
  const double cell_w = static_cast<double>(w) / static_cast<double>(cols);

  const auto gradient = [&](std::size_t y, std::size_t x) {
    const auto& l = lab[y * w + (x > 0 ? x - 1 : x)];
    const auto& r = lab[y * w + (x + 1 < w ? x + 1 : x)];
    const auto& u = lab[(y > 0 ? y - 1 : y) * w + x];
    const auto& d = lab[(y + 1 < h ? y + 1 : y) * w + x];
    double g = 0.0;
    for (int c = 0; c < 3; ++c) g += (r[c] - l[c]) * (r[c] - l[c]) + (d[c] - u[c]) * (d[c] - u[c]);
    return g;
  };

  std::vector<Center> centers;
  centers.reserve(rows * cols);
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t i = 0; i < cols; ++i) {
      auto cy = static_cast<std::size_t>((static_cast<double>(j) + 0.5) * cell_h);
      auto cx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * cell_w);
      // Move the seed off edges to the lowest-gradient pixel of its 3x3 patch.
      std::size_t by = cy, bx = cx;
      double best = gradient(cy, cx);
      for (std::size_t y = cy > 0 ? cy - 1 : 0; y <= std::min(cy + 1, h - 1); ++y) {
        for (std::size_t x = cx > 0 ? cx - 1 : 0; x <= std::min(cx + 1, w - 1); ++x) {
          const double g = gradient(y, x);
          if (g < best) {
            best = g;
            by = y;
            bx = x;
          }
        }
      }
      const auto& c = lab[by * w + bx];
      centers.push_back({c[0], c[1], c[2], static_cast<double>(bx), static_cast<double>(by)});
    }
  }

  const double spatial_weight = (params.compactness / step) * (params.compactness / step);
  const double radius = std::max({step, cell_h, cell_w});
  LabelMap labels(h, w, kUnassigned);
  std::vector<double> best_distance(n_pixels);

  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(best_distance.begin(), best_distance.end(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto& ctr = centers[c];
      const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(ctr.y - radius)));
      const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(h - 1), std::ceil(ctr.y + radius)));
      const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(ctr.x - radius)));
      const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(w - 1), std::ceil(ctr.x + radius)));
      for (std::size_t y = y0; y <= y1; ++y) {
        for (std::size_t x = x0; x <= x1; ++x) {
          const std::size_t p = y * w + x;
          const double dl = lab[p][0] - ctr.l, da = lab[p][1] - ctr.a, db = lab[p][2] - ctr.b;
          const double dx = static_cast<double>(x) - ctr.x, dy = static_cast<double>(y) - ctr.y;
          const double d = dl * dl + da * da + db * db + spatial_weight * (dx * dx + dy * dy);
          if (d < best_distance[p]) {
            best_distance[p] = d;
            labels[p] = static_cast<std::int32_t>(c);
          }
        }
      }
    }

    std::vector<Center> sums(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t p = 0; p < n_pixels; ++p) {
      if (labels[p] == kUnassigned) continue;
      auto& s = sums[static_cast<std::size_t>(labels[p])];
      s.l += lab[p][0];
      s.a += lab[p][1];
      s.b += lab[p][2];
      s.x += static_cast<double>(p % w);
      s.y += static_cast<double>(p / w);
      ++counts[static_cast<std::size_t>(labels[p])];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      const double n = static_cast<double>(counts[c]);
      centers[c] = {sums[c].l / n, sums[c].a / n, sums[c].b / n, sums[c].x / n, sums[c].y / n};
    }
  }

  enforce_connectivity(labels, centers.size(), lab);

  SuperpixelLabeling out;
  out.count = relabel_contiguous(labels);
  out.labels = std::move(labels);
  out.centroids.assign(out.count, RegionCentroid{});
  std::vector<std::size_t> counts(out.count, 0);
  for (std::size_t p = 0; p < n_pixels; ++p) {
    const auto r = static_cast<std::size_t>(out.labels[p]);
    auto& c = out.centroids[r];
    c.x += static_cast<double>(p % w);
    c.y += static_cast<double>(p / w);
    for (int ch = 0; ch < 3; ++ch) c.lab[ch] += lab[p][ch];
    ++counts[r];
  }
  for (std::size_t r = 0; r < out.count; ++r) {
    const double n = static_cast<double>(counts[r]);
    auto& c = out.centroids[r];
    c.x /= n;
    c.y /= n;
    for (auto& v : c.lab) v /= n;
  }
  return out;
}

std::vector<double> region_mean(const SuperpixelLabeling& labeling, const ScalarMap& values) {
  if (!labeling.labels.same_shape(values)) fail(ErrorCode::DimMismatch, "map and label map differ in size");
  std::vector<double> sums(labeling.count, 0.0);
  std::vector<std::size_t> counts(labeling.count, 0);
  for (std::size_t p = 0; p < values.size(); ++p) {
    const auto r = static_cast<std::size_t>(labeling.labels[p]);
    sums[r] += values[p];
    ++counts[r];
  }
  for (std::size_t r = 0; r < sums.size(); ++r) {
    if (counts[r] > 0) sums[r] /= static_cast<double>(counts[r]);
  }
  return sums;
}

std::vector<std::size_t> region_sizes(const SuperpixelLabeling& labeling) {
  std::vector<std::size_t> sizes(labeling.count, 0);
  for (auto l : labeling.labels.values()) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

ScalarMap upsample_bilinear(const ScalarMap& grid, std::size_t out_height, std::size_t out_width) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "empty grid");
  if (out_height == 0 || out_width == 0) fail(ErrorCode::InvalidArgument, "empty output size");

  // Source coordinate of output sample i: (i + 0.5) * in / out - 0.5, clamped.
  struct Tap {
    std::size_t lo, hi;
    double t;
  };
  const auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> result(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
      const double src = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const auto hi = std::min(lo + 1, in - 1);
      result[i] = {lo, hi, src - static_cast<double>(lo)};
    }
    return result;
  };
  const auto ys = taps(grid.height(), out_height);
  const auto xs = taps(grid.width(), out_width);

  ScalarMap out(out_height, out_width);
  for (std::size_t y = 0; y < out_height; ++y) {
    for (std::size_t x = 0; x < out_width; ++x) {
      const auto& ty = ys[y];
      const auto& tx = xs[x];
      const double top = std::lerp(grid(ty.lo, tx.lo), grid(ty.lo, tx.hi), tx.t);
      const double bottom = std::lerp(grid(ty.hi, tx.lo), grid(ty.hi, tx.hi), tx.t);
      out(y, x) = std::lerp(top, bottom, ty.t);
    }
  }
  return out;
}

}  // namespace coloc

#include "coloc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "coloc/error.hpp"
#include "coloc/image_io.hpp"

namespace coloc {
namespace {

constexpr std::array<double, kSyntheticGroups> kGroupLevel = {9.0, 7.0, 5.0, 3.0, 1.0};
constexpr double kLevelJitter = 0.3;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform(0.0, static_cast<double>(n))); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(index(static_cast<std::size_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

std::uint8_t channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Cell {
  std::size_t row, col;
};

// Feature cells whose centres lie inside `inner` (pixel coordinates).
std::vector<Cell> cells_inside(const Box& inner, std::size_t rows, std::size_t cols, double stride) {
  std::vector<Cell> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double cy = (static_cast<double>(r) + 0.5) * stride - 0.5;
      const double cx = (static_cast<double>(c) + 0.5) * stride - 0.5;
      if (cx >= static_cast<double>(inner.xmin) && cx < static_cast<double>(inner.xmax) &&
          cy >= static_cast<double>(inner.ymin) && cy < static_cast<double>(inner.ymax)) {
        out.push_back({r, c});
      }
    }
  }
  return out;
}

std::vector<Cell> cells_outside(const Box& outer, std::size_t rows, std::size_t cols, double stride) {
  const auto inside = cells_inside(outer, rows, cols, stride);
  std::vector<Cell> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const bool in = std::any_of(inside.begin(), inside.end(), [&](const Cell& k) { return k.row == r && k.col == c; });
      if (!in) out.push_back({r, c});
    }
  }
  return out;
}

// Gaussian blob (sigma one cell) peaked at `peak_cell`, zero outside `allowed`.
void paint_blob(std::span<float> map, std::size_t cols, const std::vector<Cell>& allowed, const Cell& peak_cell,
                double peak) {
  for (const auto& cell : allowed) {
    const double dr = static_cast<double>(cell.row) - static_cast<double>(peak_cell.row);
    const double dc = static_cast<double>(cell.col) - static_cast<double>(peak_cell.col);
    map[cell.row * cols + cell.col] = static_cast<float>(peak * std::exp(-0.5 * (dr * dr + dc * dc)));
  }
}

Cell nearest_cell(const std::vector<Cell>& cells, double y, double x, double stride) {
  Cell best = cells.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) {
    const double cy = (static_cast<double>(c.row) + 0.5) * stride - 0.5;
    const double cx = (static_cast<double>(c.col) + 0.5) * stride - 0.5;
    const double d = (cy - y) * (cy - y) + (cx - x) * (cx - x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

SyntheticImage make_image(const SyntheticOptions& opt, const std::array<std::vector<std::size_t>, kSyntheticGroups>& groups,
                          std::size_t index, Rng& rng) {
  const auto w = static_cast<std::int64_t>(opt.width), h = static_cast<std::int64_t>(opt.height);
  const auto side_w = rng.integer(static_cast<std::int64_t>(opt.object_min), static_cast<std::int64_t>(opt.object_max));
  const auto side_h = rng.integer(static_cast<std::int64_t>(opt.object_min), static_cast<std::int64_t>(opt.object_max));
  constexpr std::int64_t margin = 4;
  const auto x0 = rng.integer(margin, w - margin - side_w);
  const auto y0 = rng.integer(margin, h - margin - side_h);
  const Box object{x0, y0, x0 + side_w, y0 + side_h};

  SyntheticImage out;
  out.object = object;
  out.inputs.id = "img_" + std::to_string(index);

  // Colours: muted green-grey background, saturated warm object.
  const double bg[3] = {rng.uniform(50, 90), rng.uniform(90, 130), rng.uniform(60, 100)};
  const double fg[3] = {rng.uniform(190, 230), rng.uniform(40, 80), rng.uniform(30, 70)};
  out.inputs.image = RgbImage(opt.height, opt.width);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const bool inside = x >= object.xmin && x < object.xmax && y >= object.ymin && y < object.ymax;
      const double* base = inside ? fg : bg;
      out.inputs.image(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          Rgb{channel(base[0] + rng.uniform(-8, 8)), channel(base[1] + rng.uniform(-8, 8)),
              channel(base[2] + rng.uniform(-8, 8))};
    }
  }

  out.inputs.boundary = ScalarMap(opt.height, opt.width);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const bool in_outer = x >= object.xmin - 1 && x < object.xmax + 1 && y >= object.ymin - 1 && y < object.ymax + 1;
      const bool in_inner = x >= object.xmin + 1 && x < object.xmax - 1 && y >= object.ymin + 1 && y < object.ymax - 1;
      out.inputs.boundary(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          in_outer && !in_inner ? 1.0
                                : static_cast<float>(rng.uniform(opt.boundary_noise_min, opt.boundary_noise_max));
    }
  }

  const std::size_t rows = opt.height / opt.feature_stride, cols = opt.width / opt.feature_stride;
  const auto stride = static_cast<double>(opt.feature_stride);
  const auto s = static_cast<std::int64_t>(opt.feature_stride);
  // Cells at least one stride inside the object, so upsampling does not
  // leak activation past its edge; background cells likewise keep clear.
  const Box inner{object.xmin + s, object.ymin + s, object.xmax - s, object.ymax - s};
  const Box outer{object.xmin - s, object.ymin - s, object.xmax + s, object.ymax + s};
  const auto inside_cells = cells_inside(inner, rows, cols, stride);
  const auto background_cells = cells_outside(outer, rows, cols, stride);
  if (inside_cells.empty() || background_cells.empty()) fail(ErrorCode::InvalidArgument, "object too small or too large");

  // Planted region for group 0.
  std::vector<Cell> planted_cells = inside_cells;
  Cell planted_peak = nearest_cell(inside_cells, 0.5 * static_cast<double>(object.ymin + object.ymax),
                                   0.5 * static_cast<double>(object.xmin + object.xmax), stride);
  if (opt.coverage == PlantedCoverage::Partial) {
    const auto corner = rng.index(4);
    const double cy = corner < 2 ? static_cast<double>(object.ymin) : static_cast<double>(object.ymax);
    const double cx = corner % 2 == 0 ? static_cast<double>(object.xmin) : static_cast<double>(object.xmax);
    planted_peak = nearest_cell(inside_cells, cy, cx, stride);
    planted_cells = {planted_peak};
  }

  const std::size_t m = kSyntheticGroups * opt.kernels_per_group;
  std::vector<float> values(m * rows * cols, 0.0f);
  for (std::size_t g = 0; g < kSyntheticGroups; ++g) {
    for (auto kernel : groups[g]) {
      std::span<float> map(values.data() + kernel * rows * cols, rows * cols);
      const double peak = kGroupLevel[g] + rng.uniform(-kLevelJitter, kLevelJitter);
      const bool on_object = g == 0 || g == 1 || (g == 2 && index % 2 == 0);
      if (g == 0) {
        paint_blob(map, cols, planted_cells, planted_peak, peak);
      } else if (on_object) {
        paint_blob(map, cols, inside_cells, inside_cells[rng.index(inside_cells.size())], peak);
      } else {
        paint_blob(map, cols, background_cells, background_cells[rng.index(background_cells.size())], peak);
      }
    }
  }
  out.inputs.features = FeatureStack(Tensor{{static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(rows),
                                             static_cast<std::uint32_t>(cols)},
                                            std::move(values)});
  return out;
}

}  // namespace

SyntheticDataset make_synthetic_dataset(const std::string& class_name, std::size_t n_images,
                                        const SyntheticOptions& options, std::uint64_t seed) {
  if (options.feature_stride == 0 || options.kernels_per_group == 0 || options.object_min > options.object_max ||
      options.object_max + 8 > std::min(options.width, options.height)) {
    fail(ErrorCode::InvalidArgument, "inconsistent synthetic options");
  }
  Rng rng(seed);
  SyntheticDataset out;
  out.class_name = class_name;

  const std::size_t m = kSyntheticGroups * options.kernels_per_group;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  for (std::size_t g = 0; g < kSyntheticGroups; ++g) {
    out.groups[g].assign(order.begin() + static_cast<std::ptrdiff_t>(g * options.kernels_per_group),
                         order.begin() + static_cast<std::ptrdiff_t>((g + 1) * options.kernels_per_group));
    std::sort(out.groups[g].begin(), out.groups[g].end());
  }

  for (std::size_t i = 0; i < n_images; ++i) out.images.push_back(make_image(options, out.groups, i, rng));
  return out;
}

std::filesystem::path write_synthetic_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "features");
  std::filesystem::create_directories(dir / "boundary");

  DatasetManifest manifest;
  manifest.class_name = dataset.class_name;
  for (const auto& img : dataset.images) {
    ImageEntry entry;
    entry.id = img.inputs.id;
    entry.width = static_cast<std::uint32_t>(img.inputs.image.width());
    entry.height = static_cast<std::uint32_t>(img.inputs.image.height());
    entry.image_path = dir / "images" / (entry.id + ".ppm");
    entry.features_path = dir / "features" / (entry.id + ".ccft");
    entry.boundary_path = dir / "boundary" / (entry.id + ".ccft");
    entry.gt_boxes = {img.object};

    write_ppm(entry.image_path, img.inputs.image);
    Tensor features;
    features.dims = {static_cast<std::uint32_t>(img.inputs.features.kernels()),
                     static_cast<std::uint32_t>(img.inputs.features.height()),
                     static_cast<std::uint32_t>(img.inputs.features.width())};
    for (std::size_t k = 0; k < img.inputs.features.kernels(); ++k) {
      const auto map = img.inputs.features.kernel_map(k);
      features.values.insert(features.values.end(), map.begin(), map.end());
    }
    save_tensor(entry.features_path, features);
    save_tensor(entry.boundary_path, tensor_from_map(img.inputs.boundary));
    manifest.images.push_back(std::move(entry));
  }
  const auto path = dir / "manifest.json";
  save_manifest(path, manifest);
  return path;
}

}  // namespace coloc

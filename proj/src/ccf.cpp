#include "coloc/ccf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "coloc/error.hpp"

namespace coloc {

ActivationMatrix::ActivationMatrix(std::size_t kernels, std::size_t images)
    : kernels_(kernels), images_(images), values_(kernels * images, 0.0) {}

void ActivationMatrix::scale(double factor) {
  for (auto& v : values_) v *= factor;
}

std::vector<double> activation_column(const FeatureStack& stack) {
  std::vector<double> column(stack.kernels());
  for (std::size_t i = 0; i < stack.kernels(); ++i) {
    const auto map = stack.kernel_map(i);
    column[i] = *std::max_element(map.begin(), map.end());
  }
  return column;
}

ActivationMatrix build_activation_matrix(std::span<const std::vector<double>> columns) {
  if (columns.empty()) fail(ErrorCode::InvalidArgument, "no images");
  const std::size_t m = columns.front().size();
  ActivationMatrix a(m, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != m) {
      fail(ErrorCode::KernelCountMismatch, "image " + std::to_string(j) + " has " +
                                               std::to_string(columns[j].size()) + " kernels, expected " +
                                               std::to_string(m));
    }
    for (std::size_t i = 0; i < m; ++i) a.at(i, j) = columns[j][i];
  }
  return a;
}

ActivationMatrix build_activation_matrix(std::span<const FeatureStack> stacks) {
  std::vector<std::vector<double>> columns;
  columns.reserve(stacks.size());
  for (const auto& s : stacks) columns.push_back(activation_column(s));
  return build_activation_matrix(columns);
}

double kernel_distance(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "activation vectors differ in length");
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "p must be >= 1");
  double total = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) total += std::pow(std::abs(a[t] - b[t]), p);
  return std::pow(total, 1.0 / p);
}

std::vector<std::size_t> KernelClustering::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == cluster) out.push_back(i);
  }
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double d = a[t] - b[t];
    total += d * d;
  }
  return total;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct LloydResult {
  std::vector<std::size_t> assignment;
  double inertia = 0.0;
};

class KMeans {
 public:
  KMeans(const ActivationMatrix& a, std::size_t k) : a_(a), k_(k), dim_(a.images()) {}

  LloydResult run(std::mt19937_64& rng, int max_iterations) {
    seed_plus_plus(rng);
    const std::size_t m = a_.kernels();
    std::vector<std::size_t> assignment(m, k_);
    std::vector<double> dist(m, 0.0);

    for (int iter = 0; iter < max_iterations; ++iter) {
      std::vector<std::size_t> next(m);
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k_; ++c) {
          const double d = squared_distance(a_.row(i), centroid(c));
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        next[i] = best;
        dist[i] = best_d;
      }
      const bool reseeded = reseed_empty(next, dist);
      const bool stable = !reseeded && next == assignment;
      assignment = std::move(next);
      update_centroids(assignment);
      if (stable) break;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) inertia += squared_distance(a_.row(i), centroid(assignment[i]));
    return {std::move(assignment), inertia};
  }

 private:
  std::span<double> centroid(std::size_t c) { return {centroids_.data() + c * dim_, dim_}; }

  void set_centroid(std::size_t c, std::size_t point) {
    const auto row = a_.row(point);
    std::copy(row.begin(), row.end(), centroid(c).begin());
  }

  void seed_plus_plus(std::mt19937_64& rng) {
    const std::size_t m = a_.kernels();
    centroids_.assign(k_ * dim_, 0.0);
    set_centroid(0, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m)));
    std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        nearest[i] = std::min(nearest[i], squared_distance(a_.row(i), centroid(c - 1)));
        total += nearest[i];
      }
      std::size_t pick = m - 1;
      if (total > 0.0) {
        const double target = uniform01(rng) * total;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          cumulative += nearest[i];
          if (cumulative > target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m));
      }
      set_centroid(c, pick);
    }
  }

  // Empty clusters take the point farthest from its centroid among clusters
  // that can spare one.
  bool reseed_empty(std::vector<std::size_t>& assignment, std::vector<double>& dist) {
    std::vector<std::size_t> counts(k_, 0);
    for (auto c : assignment) ++counts[c];
    bool changed = false;
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = assignment.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (counts[assignment[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      if (far == assignment.size()) continue;
      --counts[assignment[far]];
      assignment[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      set_centroid(c, far);
      changed = true;
    }
    return changed;
  }

  void update_centroids(const std::vector<std::size_t>& assignment) {
    std::vector<double> sums(k_ * dim_, 0.0);
    std::vector<std::size_t> counts(k_, 0);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const auto row = a_.row(i);
      for (std::size_t t = 0; t < dim_; ++t) sums[assignment[i] * dim_ + t] += row[t];
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k_; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t t = 0; t < dim_; ++t) {
        centroids_[c * dim_ + t] = sums[c * dim_ + t] / static_cast<double>(counts[c]);
      }
    }
  }

  const ActivationMatrix& a_;
  std::size_t k_;
  std::size_t dim_;
  std::vector<double> centroids_;
};

std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& assignment, std::size_t k) {
  std::vector<std::size_t> remap(k, k);
  std::size_t next = 0;
  std::vector<std::size_t> out(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto& r = remap[assignment[i]];
    if (r == k) r = next++;
    out[i] = r;
  }
  return out;
}

}  // namespace

KernelClustering cluster_kernels(const ActivationMatrix& activations, std::size_t k_clusters,
                                 std::uint64_t seed, const KMeansOptions& options) {
  if (k_clusters < 1) fail(ErrorCode::InvalidArgument, "k_clusters must be >= 1");
  if (activations.kernels() < k_clusters) {
    fail(ErrorCode::TooFewKernels, std::to_string(activations.kernels()) + " kernels for " +
                                       std::to_string(k_clusters) + " clusters");
  }
  if (options.restarts < 1 || options.max_iterations < 1) {
    fail(ErrorCode::InvalidArgument, "k-means needs at least one restart and iteration");
  }

  LloydResult best;
  bool have_best = false;
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1));
    KMeans kmeans(activations, k_clusters);
    auto result = kmeans.run(rng, options.max_iterations);
    if (!have_best || result.inertia < best.inertia) {
      best = std::move(result);
      have_best = true;
    }
  }

  KernelClustering out;
  out.k_clusters = k_clusters;
  out.assignment = canonical_labels(best.assignment, k_clusters);
  out.inertia = best.inertia;

  std::vector<double> sums(k_clusters, 0.0);
  std::vector<std::size_t> counts(k_clusters, 0);
  for (std::size_t i = 0; i < out.assignment.size(); ++i) {
    const auto row = activations.row(i);
    const double row_mean =
        row.empty() ? 0.0 : std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    sums[out.assignment[i]] += row_mean;
    ++counts[out.assignment[i]];
  }
  out.cluster_scores.resize(k_clusters, 0.0);
  for (std::size_t c = 0; c < k_clusters; ++c) {
    if (counts[c] > 0) out.cluster_scores[c] = sums[c] / static_cast<double>(counts[c]);
  }
  out.ranking.resize(k_clusters);
  std::iota(out.ranking.begin(), out.ranking.end(), 0);
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t x, std::size_t y) {
    return out.cluster_scores[x] > out.cluster_scores[y];
  });
  return out;
}

CcfSet select_ccfs(const KernelClustering& clustering, std::size_t rank, std::size_t top_k) {
  if (top_k < 1) fail(ErrorCode::InvalidArgument, "top_k must be >= 1");
  if (rank < 1 || rank + top_k - 1 > clustering.k_clusters) {
    fail(ErrorCode::RankOutOfRange, "rank " + std::to_string(rank) + " (top " + std::to_string(top_k) +
                                        ") with " + std::to_string(clustering.k_clusters) + " clusters");
  }
  CcfSet set;
  set.source_cluster_rank = rank;
  set.top_k = top_k;
  set.k_clusters = clustering.k_clusters;
  for (std::size_t r = rank; r < rank + top_k; ++r) {
    const auto members = clustering.members(clustering.ranking[r - 1]);
    set.kernel_ids.insert(set.kernel_ids.end(), members.begin(), members.end());
  }
  std::sort(set.kernel_ids.begin(), set.kernel_ids.end());
  for (auto c : clustering.ranking) set.cluster_scores.push_back(clustering.cluster_scores[c]);
  if (set.kernel_ids.empty()) fail(ErrorCode::InvalidArgument, "selected clusters are empty");
  return set;
}

nlohmann::ordered_json to_json(const CcfSet& set) {
  nlohmann::ordered_json doc;
  doc["class_name"] = set.class_name;
  doc["kernel_ids"] = set.kernel_ids;
  doc["k_clusters"] = set.k_clusters;
  doc["rank"] = set.source_cluster_rank;
  doc["top_k"] = set.top_k;
  doc["seed"] = set.seed;
  doc["cluster_scores"] = set.cluster_scores;
  return doc;
}

CcfSet ccf_set_from_json(const nlohmann::json& doc) {
  CcfSet set;
  try {
    set.class_name = doc.at("class_name").get<std::string>();
    set.kernel_ids = doc.at("kernel_ids").get<std::vector<std::size_t>>();
    set.k_clusters = doc.at("k_clusters").get<std::size_t>();
    set.source_cluster_rank = doc.at("rank").get<std::size_t>();
    set.top_k = doc.value("top_k", std::size_t{1});
    set.seed = doc.at("seed").get<std::uint64_t>();
    set.cluster_scores = doc.at("cluster_scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  if (set.kernel_ids.empty()) fail(ErrorCode::ParseError, "empty kernel_ids");
  return set;
}

void save_ccf_set(const std::filesystem::path& path, const CcfSet& set) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << to_json(set).dump(2) << '\n';
}

CcfSet load_ccf_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, path.string());
  try {
    return ccf_set_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, e.what());
  }
}

ActivationMap combined_activation_map(const FeatureStack& stack, std::span<const std::size_t> kernel_ids) {
  ActivationMap out;
  out.grid = ScalarMap(stack.height(), stack.width(), 0.0);
  for (auto id : kernel_ids) {
    if (id >= stack.kernels()) {
      fail(ErrorCode::KernelCountMismatch, "kernel id " + std::to_string(id) + " out of range for " +
                                               std::to_string(stack.kernels()) + " kernels");
    }
    const auto map = stack.kernel_map(id);
    for (std::size_t p = 0; p < map.size(); ++p) out.grid[p] += std::max(0.0, static_cast<double>(map[p]));
  }
  for (double v : out.grid.values()) out.raw_total += v;

  if (out.raw_total > 0.0) {
    for (auto& v : out.grid.values()) v /= out.raw_total;
  } else {
    out.degenerate = true;
    const double uniform = 1.0 / static_cast<double>(out.grid.size());
    for (auto& v : out.grid.values()) v = uniform;
  }
  for (double v : out.grid.values()) out.sum += v;
  return out;
}

}  // namespace coloc

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "coloc/grid.hpp"
#include "coloc/tensor_store.hpp"

namespace coloc {

/// m x n matrix of per-kernel spatial-max responses; row i is the activation
/// vector of kernel i across the n images.
class ActivationMatrix {
 public:
  ActivationMatrix() = default;
  ActivationMatrix(std::size_t kernels, std::size_t images);

  std::size_t kernels() const noexcept { return kernels_; }
  std::size_t images() const noexcept { return images_; }

  double& at(std::size_t kernel, std::size_t image) { return values_[kernel * images_ + image]; }
  double at(std::size_t kernel, std::size_t image) const { return values_[kernel * images_ + image]; }
  std::span<const double> row(std::size_t kernel) const {
    return {values_.data() + kernel * images_, images_};
  }

  void scale(double factor);

 private:
  std::size_t kernels_ = 0;
  std::size_t images_ = 0;
  std::vector<double> values_;
};

/// Spatial max of every kernel map in one stack (one column of A).
std::vector<double> activation_column(const FeatureStack& stack);

ActivationMatrix build_activation_matrix(std::span<const FeatureStack> stacks);
ActivationMatrix build_activation_matrix(std::span<const std::vector<double>> columns);

/// (sum_t |a[t] - b[t]|^p)^(1/p).
double kernel_distance(std::span<const double> a, std::span<const double> b, double p);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

struct KernelClustering {
  std::size_t k_clusters = 0;
  /// kernel index -> cluster id; ids are numbered by first appearance in
  /// kernel order.
  std::vector<std::size_t> assignment;
  /// Grand mean of the member kernels' activation entries.
  std::vector<double> cluster_scores;
  /// Cluster ids by descending score, ties to the lower id.
  std::vector<std::size_t> ranking;
  double inertia = 0.0;

  std::vector<std::size_t> members(std::size_t cluster) const;
};

/// Euclidean k-means (k-means++ seeding, best of `restarts` by inertia) over
/// the rows of A. Deterministic for a fixed seed.
KernelClustering cluster_kernels(const ActivationMatrix& activations, std::size_t k_clusters,
                                 std::uint64_t seed, const KMeansOptions& options = {});

struct CcfSet {
  std::string class_name;
  std::vector<std::size_t> kernel_ids;
  std::size_t source_cluster_rank = 1;
  std::size_t top_k = 1;
  std::size_t k_clusters = 0;
  std::uint64_t seed = 0;
  std::vector<double> cluster_scores;  // in ranking order
};

/// Members of the rank-th cluster (1-based), or with top_k > 1 the union of
/// ranks [rank, rank + top_k - 1].
CcfSet select_ccfs(const KernelClustering& clustering, std::size_t rank, std::size_t top_k = 1);

nlohmann::ordered_json to_json(const CcfSet& set);
CcfSet ccf_set_from_json(const nlohmann::json& doc);
void save_ccf_set(const std::filesystem::path& path, const CcfSet& set);
CcfSet load_ccf_set(const std::filesystem::path& path);

struct ActivationMap {
  ScalarMap grid;
  double sum = 0.0;        // total of `grid` after normalization
  double raw_total = 0.0;  // total of the clamped combined map
  bool degenerate = false;
};

/// Sum of the selected kernels' maps (negatives clamped to 0 first),
/// normalized to sum 1. An all-zero total gives a uniform map with the
/// degenerate flag set.
ActivationMap combined_activation_map(const FeatureStack& stack, std::span<const std::size_t> kernel_ids);

}  // namespace coloc

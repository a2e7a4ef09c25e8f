#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "coloc/grid.hpp"
#include "coloc/superpixel.hpp"

namespace coloc {

/// Distance value for node pairs with no connecting path.
inline constexpr double kUnreachable = std::numeric_limits<double>::max();

struct WeightedEdge {
  std::uint32_t a = 0;  // a < b
  std::uint32_t b = 0;
  double weight = 0.0;
};

struct Neighbor {
  std::uint32_t node = 0;
  double weight = 0.0;
};

/// Undirected superpixel adjacency graph with nonnegative weights.
class SuperpixelGraph {
 public:
  SuperpixelGraph() = default;
  /// Throws InvalidArgument on negative weights, self loops or bad node ids.
  SuperpixelGraph(std::size_t node_count, std::vector<WeightedEdge> edges);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::span<const WeightedEdge> edges() const noexcept { return edges_; }
  std::span<const Neighbor> neighbors(std::size_t node) const { return adjacency_[node]; }

 private:
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// One edge per 4-adjacent region pair, weighted by the mean over straddling
/// pixel pairs (p, q) of max(boundary[p], boundary[q]).
SuperpixelGraph build_graph(const SuperpixelLabeling& labeling, const ScalarMap& boundary);

/// Single-source shortest paths with a binary heap; equal distances pop the
/// lower node id first.
std::vector<double> dijkstra(const SuperpixelGraph& graph, std::size_t source);

/// All-pairs geodesic distances by one Dijkstra run per source. Weights are
/// nonnegative, so Johnson's reweighting pass is the identity and is skipped.
/// Rows are computed on up to `workers` threads.
Matrix all_pairs_geodesic(const SuperpixelGraph& graph, std::size_t workers = 1);

}  // namespace coloc

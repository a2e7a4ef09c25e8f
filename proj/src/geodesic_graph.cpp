#include "coloc/geodesic_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <utility>

#include "coloc/error.hpp"
#include "coloc/parallel.hpp"

namespace coloc {

SuperpixelGraph::SuperpixelGraph(std::size_t node_count, std::vector<WeightedEdge> edges)
    : edges_(std::move(edges)), adjacency_(node_count) {
  for (auto& e : edges_) {
    if (e.a == e.b) fail(ErrorCode::InvalidArgument, "self loop");
    if (e.a >= node_count || e.b >= node_count) fail(ErrorCode::InvalidArgument, "edge node out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      fail(ErrorCode::InvalidArgument, "edge weights must be finite and nonnegative");
    }
    if (e.a > e.b) std::swap(e.a, e.b);
    adjacency_[e.a].push_back({e.b, e.weight});
    adjacency_[e.b].push_back({e.a, e.weight});
  }
}

SuperpixelGraph build_graph(const SuperpixelLabeling& labeling, const ScalarMap& boundary) {
  const auto& labels = labeling.labels;
  if (!labels.same_shape(boundary)) fail(ErrorCode::DimMismatch, "boundary map and label map differ in size");
  for (double v : boundary.values()) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::BoundaryOutOfRange, "boundary values must lie in [0, 1]");
  }

  struct Accumulator {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, Accumulator> seams;
  const auto straddle = [&](std::size_t p, std::size_t q) {
    const auto lp = static_cast<std::uint32_t>(labels[p]);
    const auto lq = static_cast<std::uint32_t>(labels[q]);
    if (lp == lq) return;
    auto& acc = seams[std::minmax(lp, lq)];
    acc.sum += std::max(boundary[p], boundary[q]);
    ++acc.count;
  };
  const std::size_t h = labels.height(), w = labels.width();
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t p = y * w + x;
      if (x + 1 < w) straddle(p, p + 1);
      if (y + 1 < h) straddle(p, p + w);
    }
  }

  std::vector<WeightedEdge> edges;
  edges.reserve(seams.size());
  for (const auto& [key, acc] : seams) {
    edges.push_back({key.first, key.second, acc.sum / static_cast<double>(acc.count)});
  }
  return SuperpixelGraph(labeling.count, std::move(edges));
}

std::vector<double> dijkstra(const SuperpixelGraph& graph, std::size_t source) {
  const std::size_t n = graph.node_count();
  if (source >= n) fail(ErrorCode::InvalidArgument, "source out of range");
  std::vector<double> dist(n, kUnreachable);
  std::vector<std::uint8_t> settled(n, 0);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, static_cast<std::uint32_t>(source));
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    for (const auto& nb : graph.neighbors(u)) {
      const double candidate = d + nb.weight;
      if (candidate < dist[nb.node]) {
        dist[nb.node] = candidate;
        heap.emplace(candidate, nb.node);
      }
    }
  }
  return dist;
}

Matrix all_pairs_geodesic(const SuperpixelGraph& graph, std::size_t workers) {
  const std::size_t n = graph.node_count();
  Matrix dist(n, n, kUnreachable);
  parallel_for(n, workers, [&](std::size_t source) {
    const auto row = dijkstra(graph, source);
    std::copy(row.begin(), row.end(), dist.row(source).begin());
  });
  // Forward and reverse sums along the same path can differ in the last ulp.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(dist(i, j), dist(j, i));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

}  // namespace coloc

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "coloc/geodesic_graph.hpp"
#include "test_util.hpp"

using namespace coloc;
using coloc::testing::error_code_of;
using coloc::testing::uniform;

namespace {

SuperpixelGraph random_graph(std::mt19937_64& rng, std::size_t n, double edge_probability) {
  std::vector<WeightedEdge> edges;
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) {
      if (uniform(rng, 0, 1) < edge_probability) edges.push_back({a, b, uniform(rng, 0, 1)});
    }
  }
  return SuperpixelGraph(n, std::move(edges));
}

Matrix floyd_warshall(const SuperpixelGraph& g) {
  const std::size_t n = g.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix d(n, n, inf);
  for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& e : g.edges()) {
    d(e.a, e.b) = std::min(d(e.a, e.b), e.weight);
    d(e.b, e.a) = std::min(d(e.b, e.a), e.weight);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  }
  return d;
}

// Region pairs as stored in the graph, weight keyed by (a, b).
std::map<std::pair<std::uint32_t, std::uint32_t>, double> edge_map(const SuperpixelGraph& g) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> out;
  for (const auto& e : g.edges()) out[{e.a, e.b}] = e.weight;
  return out;
}

SuperpixelLabeling labeling_from(const LabelMap& labels) {
  SuperpixelLabeling s;
  s.labels = labels;
  std::int32_t max_label = 0;
  for (auto l : labels.values()) max_label = std::max(max_label, l);
  s.count = static_cast<std::size_t>(max_label) + 1;
  return s;
}

}  // namespace

TEST_SUITE("build_graph") {
  TEST_CASE("all-zero boundary map gives zero weights") {
    LabelMap labels(4, 4);
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 4; ++x) labels(y, x) = static_cast<std::int32_t>((y / 2) * 2 + x / 2);
    }
    const auto g = build_graph(labeling_from(labels), ScalarMap(4, 4, 0.0));
    CHECK(g.node_count() == 4);
    CHECK(g.edges().size() == 4);  // 2x2 block grid, no diagonal adjacency
    for (const auto& e : g.edges()) CHECK(e.weight == 0.0);
  }

  TEST_CASE("two regions split by a boundary line of value 1") {
    LabelMap labels(5, 6);
    ScalarMap boundary(5, 6, 0.0);
    for (std::size_t y = 0; y < 5; ++y) {
      for (std::size_t x = 0; x < 6; ++x) labels(y, x) = x < 3 ? 0 : 1;
      boundary(y, 3) = 1.0;
    }
    const auto g = build_graph(labeling_from(labels), boundary);
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0].weight == 1.0);
  }

  TEST_CASE("random instances match a straddling-pair enumeration") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t h = 3 + rng() % 12, w = 3 + rng() % 12, regions = 2 + rng() % 6;
      LabelMap labels(h, w);
      for (auto& l : labels.values()) l = static_cast<std::int32_t>(rng() % regions);
      // Ensure every id is present.
      for (std::size_t r = 0; r < regions; ++r) labels[r] = static_cast<std::int32_t>(r);
      ScalarMap boundary(h, w);
      for (auto& v : boundary.values()) v = uniform(rng, 0, 1);
      const auto got = edge_map(build_graph(labeling_from(labels), boundary));

      for (std::uint32_t a = 0; a < regions; ++a) {
        for (std::uint32_t b = a + 1; b < regions; ++b) {
          double sum = 0.0;
          int count = 0;
          for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
              const std::pair<std::size_t, std::size_t> nbrs[2] = {{y, x + 1}, {y + 1, x}};
              for (auto [ny, nx] : nbrs) {
                if (ny >= h || nx >= w) continue;
                const auto la = static_cast<std::uint32_t>(labels(y, x)), lb = static_cast<std::uint32_t>(labels(ny, nx));
                if ((la == a && lb == b) || (la == b && lb == a)) {
                  sum += std::max(boundary(y, x), boundary(ny, nx));
                  ++count;
                }
              }
            }
          }
          const auto it = got.find({a, b});
          if (count == 0) {
            CHECK(it == got.end());
          } else {
            REQUIRE(it != got.end());
            CHECK(std::abs(it->second - sum / count) < 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("input validation") {
    LabelMap labels(2, 2, 0);
    labels(1, 1) = 1;
    const auto s = labeling_from(labels);
    CHECK(error_code_of([&] { build_graph(s, ScalarMap(2, 3, 0.0)); }) == ErrorCode::DimMismatch);
    ScalarMap high(2, 2, 0.0);
    high(0, 0) = 1.5;
    CHECK(error_code_of([&] { build_graph(s, high); }) == ErrorCode::BoundaryOutOfRange);
    ScalarMap nan(2, 2, 0.0);
    nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(error_code_of([&] { build_graph(s, nan); }) == ErrorCode::BoundaryOutOfRange);
  }

  TEST_CASE("graph construction rejects bad edges") {
    CHECK(error_code_of([] { SuperpixelGraph(2, {{0, 1, -0.5}}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { SuperpixelGraph(2, {{0, 0, 1.0}}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { SuperpixelGraph(2, {{0, 2, 1.0}}); }) == ErrorCode::InvalidArgument);
  }
}

TEST_SUITE("all_pairs_geodesic") {
  TEST_CASE("path graph") {
    const SuperpixelGraph g(3, {{0, 1, 1.0}, {1, 2, 1.0}});
    const auto d = all_pairs_geodesic(g);
    CHECK(d(0, 2) == 2.0);
    CHECK(d(2, 0) == 2.0);
  }

  TEST_CASE("triangle shortcut beats the heavy edge") {
    const SuperpixelGraph g(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 3.0}});
    CHECK(all_pairs_geodesic(g)(0, 2) == 2.0);
  }

  TEST_CASE("disconnected components are unreachable") {
    const SuperpixelGraph g(4, {{0, 1, 0.5}, {2, 3, 0.25}});
    const auto d = all_pairs_geodesic(g);
    CHECK(d(0, 2) == kUnreachable);
    CHECK(d(3, 1) == kUnreachable);
    CHECK(d(2, 3) == 0.25);
  }

  TEST_CASE("Dijkstra per source equals Floyd-Warshall on 200 random graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng() % 30;
      const auto g = random_graph(rng, n, uniform(rng, 0.05, 0.5));
      const auto d = all_pairs_geodesic(g);
      const auto oracle = floyd_warshall(g);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (std::isinf(oracle(i, j))) {
            REQUIRE(d(i, j) == kUnreachable);
          } else {
            REQUIRE(std::abs(d(i, j) - oracle(i, j)) <= 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("metric axioms") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng() % 25;
      const auto d = all_pairs_geodesic(random_graph(rng, n, 0.3));
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(d(i, i) == 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          REQUIRE(d(i, j) == d(j, i));
          REQUIRE(d(i, j) >= 0.0);
          if (d(i, j) == kUnreachable) continue;
          for (std::size_t k = 0; k < n; ++k) {
            if (d(i, k) == kUnreachable || d(k, j) == kUnreachable) continue;
            REQUIRE(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("raising one edge weight never shortens any distance") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 3 + rng() % 20;
      const auto g = random_graph(rng, n, 0.35);
      if (g.edges().empty()) continue;
      std::vector<WeightedEdge> edges(g.edges().begin(), g.edges().end());
      edges[rng() % edges.size()].weight += uniform(rng, 0.01, 2.0);
      const auto before = all_pairs_geodesic(g);
      const auto after = all_pairs_geodesic(SuperpixelGraph(n, edges));
      for (std::size_t p = 0; p < before.size(); ++p) REQUIRE(after[p] >= before[p]);
    }
  }

  TEST_CASE("worker count does not change the result") {
    std::mt19937_64 rng(9);
    const auto g = random_graph(rng, 60, 0.1);
    CHECK(all_pairs_geodesic(g, 1) == all_pairs_geodesic(g, 4));
  }
}

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "coloc/superpixel.hpp"
#include "test_util.hpp"

using namespace coloc;
using coloc::testing::error_code_of;
using coloc::testing::uniform;

namespace {

RgbImage noisy_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  RgbImage img(h, w);
  // A few coloured blocks plus per-pixel noise.
  const Rgb palette[4] = {{200, 40, 40}, {40, 160, 60}, {30, 60, 200}, {220, 220, 90}};
  const std::size_t bh = 1 + h / 3, bw = 1 + w / 4;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const auto& base = palette[((y / bh) + (x / bw)) % 4];
      const auto jitter = [&](std::uint8_t c) {
        return static_cast<std::uint8_t>(std::clamp(static_cast<int>(c) + static_cast<int>(rng() % 31) - 15, 0, 255));
      };
      img(y, x) = Rgb{jitter(base.r), jitter(base.g), jitter(base.b)};
    }
  }
  return img;
}

void check_partition(const SuperpixelLabeling& s) {
  const auto& labels = s.labels;
  REQUIRE(s.count >= 1);
  std::vector<std::size_t> sizes(s.count, 0);
  for (auto l : labels.values()) {
    REQUIRE(l >= 0);
    REQUIRE(static_cast<std::size_t>(l) < s.count);
    ++sizes[static_cast<std::size_t>(l)];
  }
  CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == labels.size());
  for (auto n : sizes) REQUIRE(n > 0);  // no id gaps

  // Each region is one 4-connected component: flood from its first pixel.
  std::vector<std::uint8_t> seen(labels.size(), 0);
  std::set<std::int32_t> flooded;
  const std::size_t w = labels.width(), h = labels.height();
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (seen[start]) continue;
    const auto label = labels[start];
    REQUIRE_MESSAGE(flooded.insert(label).second, "region " << label << " is not 4-connected");
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const auto p = q.front();
      q.pop();
      const std::size_t y = p / w, x = p % w;
      for (auto [ok, nb] : {std::pair{x > 0, p - 1}, std::pair{x + 1 < w, p + 1}, std::pair{y > 0, p - w},
                            std::pair{y + 1 < h, p + w}}) {
        if (ok && !seen[nb] && labels[nb] == label) {
          seen[nb] = 1;
          q.push(nb);
        }
      }
    }
  }
}

}  // namespace

TEST_SUITE("segment") {
  TEST_CASE("uniform 60x60 image with target 9 gives 9 near-equal cells") {
    const RgbImage img(60, 60, Rgb{120, 120, 120});
    const auto s = segment(img, {9, 10.0});
    check_partition(s);
    REQUIRE(s.count == 9);
    const auto sizes = region_sizes(s);
    double mean = 0.0;
    for (auto n : sizes) mean += static_cast<double>(n);
    mean /= 9.0;
    double var = 0.0;
    for (auto n : sizes) var += (static_cast<double>(n) - mean) * (static_cast<double>(n) - mean);
    const double cv = std::sqrt(var / 9.0) / mean;
    CHECK(cv < 0.2);
    CHECK(mean == doctest::Approx(400.0));
  }

  TEST_CASE("target 1 covers the image with one region") {
    std::mt19937_64 rng(1);
    const auto s = segment(noisy_image(rng, 17, 23), {1, 10.0});
    CHECK(s.count == 1);
    for (auto l : s.labels.values()) CHECK(l == 0);
  }

  TEST_CASE("too few pixels for the target") {
    const RgbImage img(2, 2);
    CHECK(error_code_of([&] { segment(img, {8, 10.0}); }) == ErrorCode::ImageTooSmall);
    CHECK(error_code_of([&] { segment(img, {2, 0.0}); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { segment(RgbImage{}, {1, 10.0}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("partition, connectivity and count bounds on varied images") {
    std::mt19937_64 rng(99);
    const std::size_t shapes[][3] = {{64, 64, 50}, {48, 96, 60}, {128, 128, 300}, {100, 30, 40},
                                     {9, 9, 9},    {1, 50, 5},   {75, 120, 200}};
    for (const auto& shape : shapes) {
      CAPTURE(shape[0]);
      CAPTURE(shape[1]);
      const auto img = noisy_image(rng, shape[0], shape[1]);
      const auto s = segment(img, {shape[2], 10.0});
      check_partition(s);
      CHECK(static_cast<double>(s.count) >= 0.5 * static_cast<double>(shape[2]));
      CHECK(static_cast<double>(s.count) <= 1.5 * static_cast<double>(shape[2]));
    }
  }

  TEST_CASE("deterministic") {
    std::mt19937_64 rng(5);
    const auto img = noisy_image(rng, 70, 90);
    CHECK(segment(img, {120, 10.0}).labels == segment(img, {120, 10.0}).labels);
  }

  TEST_CASE("regions do not straddle a strong colour edge") {
    std::mt19937_64 rng(8);
    RgbImage img(64, 64);
    for (std::size_t y = 0; y < 64; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        const bool right = x >= 37;
        const auto n = static_cast<int>(rng() % 17) - 8;
        img(y, x) = right ? Rgb{static_cast<std::uint8_t>(210 + n), 50, 40}
                          : Rgb{70, static_cast<std::uint8_t>(110 + n), 80};
      }
    }
    const auto s = segment(img, {60, 10.0});
    std::vector<int> side(s.count, -1);
    for (std::size_t y = 0; y < 64; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        const int here = x >= 37 ? 1 : 0;
        auto& seen = side[static_cast<std::size_t>(s.labels(y, x))];
        if (seen == -1) seen = here;
        REQUIRE(seen == here);
      }
    }
  }

  TEST_CASE("centroids are region means") {
    std::mt19937_64 rng(3);
    const auto s = segment(noisy_image(rng, 30, 40), {20, 10.0});
    std::vector<double> sx(s.count, 0), n(s.count, 0);
    for (std::size_t y = 0; y < 30; ++y) {
      for (std::size_t x = 0; x < 40; ++x) {
        sx[static_cast<std::size_t>(s.labels(y, x))] += static_cast<double>(x);
        n[static_cast<std::size_t>(s.labels(y, x))] += 1;
      }
    }
    for (std::size_t r = 0; r < s.count; ++r) CHECK(s.centroids[r].x == doctest::Approx(sx[r] / n[r]));
  }
}

TEST_CASE("CIELAB reference colours") {
  double lab[3];
  rgb_to_lab({255, 255, 255}, lab);
  CHECK(lab[0] == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::abs(lab[1]) < 1e-3);
  CHECK(std::abs(lab[2]) < 1e-3);
  rgb_to_lab({255, 0, 0}, lab);
  CHECK(lab[0] == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(lab[1] == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(lab[2] == doctest::Approx(67.20).epsilon(1e-3));
}

TEST_SUITE("region mean") {
  SuperpixelLabeling two_regions() {
    SuperpixelLabeling s;
    s.labels = LabelMap(1, 3);
    s.labels[0] = 0;
    s.labels[1] = 0;
    s.labels[2] = 1;
    s.count = 2;
    return s;
  }

  TEST_CASE("hand-computed two regions") {
    ScalarMap v(1, 3);
    v[0] = 1;
    v[1] = 3;
    v[2] = 5;
    CHECK(region_mean(two_regions(), v) == std::vector<double>{2.0, 5.0});
  }

  TEST_CASE("constant map gives constant means") {
    std::mt19937_64 rng(2);
    const auto s = segment(noisy_image(rng, 40, 40), {30, 10.0});
    const ScalarMap v(40, 40, 0.37);
    for (double m : region_mean(s, v)) CHECK(m == doctest::Approx(0.37).epsilon(1e-14));
  }

  TEST_CASE("matches per-pixel accumulation and commutes with relabeling") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = segment(noisy_image(rng, 32, 48), {40, 10.0});
      ScalarMap v(32, 48);
      for (auto& x : v.values()) x = uniform(rng, -2, 2);
      const auto means = region_mean(s, v);

      for (std::size_t r = 0; r < s.count; ++r) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t p = 0; p < v.size(); ++p) {
          if (static_cast<std::size_t>(s.labels[p]) == r) {
            sum += v[p];
            ++n;
          }
        }
        REQUIRE(std::abs(means[r] - sum / static_cast<double>(n)) < 1e-9);
      }

      std::vector<std::int32_t> perm(s.count);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      auto permuted = s;
      for (auto& l : permuted.labels.values()) l = perm[static_cast<std::size_t>(l)];
      const auto pm = region_mean(permuted, v);
      for (std::size_t r = 0; r < s.count; ++r) REQUIRE(pm[static_cast<std::size_t>(perm[r])] == means[r]);
    }
  }

  TEST_CASE("shape mismatch") {
    const ScalarMap v(2, 2);
    CHECK(error_code_of([&] { region_mean(two_regions(), v); }) == ErrorCode::DimMismatch);
  }
}

TEST_SUITE("upsample bilinear") {
  TEST_CASE("constants are preserved exactly") {
    const ScalarMap g(3, 5, 0.1);
    const auto out = upsample_bilinear(g, 17, 29);
    for (double v : out.values()) REQUIRE(v == 0.1);
  }

  TEST_CASE("1x2 to 1x4 is monotone with half-pixel sampling") {
    ScalarMap g(1, 2);
    g[1] = 1.0;
    const auto out = upsample_bilinear(g, 1, 4);
    // Source x = (i + 0.5) / 2 - 0.5 clamped: 0, 0.25, 0.75, 1.
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(0.25));
    CHECK(out[2] == doctest::Approx(0.75));
    CHECK(out[3] == 1.0);
    for (std::size_t i = 1; i < 4; ++i) CHECK(out[i] >= out[i - 1]);
  }

  TEST_CASE("3x3 ramp matches a scalar reference implementation") {
    ScalarMap g(3, 3);
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t x = 0; x < 3; ++x) g(y, x) = 1.0 * static_cast<double>(y) + 10.0 * static_cast<double>(x) + 0.5 * static_cast<double>(x * y);
    }
    const std::size_t oh = 7, ow = 11;
    const auto out = upsample_bilinear(g, oh, ow);
    // Reference: weights (1 - t, t) on clamped floor / ceil taps.
    const auto sample = [&](double sy, double sx) {
      sy = std::min(std::max(sy, 0.0), 2.0);
      sx = std::min(std::max(sx, 0.0), 2.0);
      const int y0 = static_cast<int>(sy), x0 = static_cast<int>(sx);
      const int y1 = std::min(y0 + 1, 2), x1 = std::min(x0 + 1, 2);
      const double ty = sy - y0, tx = sx - x0;
      return (1 - ty) * ((1 - tx) * g(y0, x0) + tx * g(y0, x1)) + ty * ((1 - tx) * g(y1, x0) + tx * g(y1, x1));
    };
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const double sy = (static_cast<double>(y) + 0.5) * 3.0 / static_cast<double>(oh) - 0.5;
        const double sx = (static_cast<double>(x) + 0.5) * 3.0 / static_cast<double>(ow) - 0.5;
        REQUIRE(std::abs(out(y, x) - sample(sy, sx)) < 1e-6);
      }
    }
  }

  TEST_CASE("downsizing and identity sizes") {
    std::mt19937_64 rng(6);
    ScalarMap g(4, 6);
    for (auto& v : g.values()) v = uniform(rng, 0, 1);
    CHECK(upsample_bilinear(g, 4, 6) == g);
    CHECK(upsample_bilinear(g, 2, 3).size() == 6);
    CHECK(error_code_of([] { upsample_bilinear(ScalarMap{}, 2, 2); }) == ErrorCode::InvalidArgument);
  }
}

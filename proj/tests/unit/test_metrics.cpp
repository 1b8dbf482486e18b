#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "repgeo/error.hpp"
#include "repgeo/geodesic.hpp"
#include "repgeo/metrics.hpp"
#include "repgeo/transforms.hpp"

using namespace repgeo;

namespace {

Tensor vec2(double x, double y) { return Tensor({2}, std::vector<double>{x, y}); }

ConvSpec conv_spec(std::size_t out, std::size_t k, Padding padding, std::uint64_t seed) {
  ConvSpec c;
  c.out_channels = out;
  c.kernel = k;
  c.padding = padding;
  c.bank.seed = seed;
  return c;
}

// Centroid of an RF map, (y, x).
std::pair<double, double> centroid(const Tensor& g) {
  double s = 0, sy = 0, sx = 0;
  for (std::size_t i = 0; i < g.height(); ++i)
    for (std::size_t j = 0; j < g.width(); ++j) {
      s += g.at(0, i, j);
      sy += g.at(0, i, j) * static_cast<double>(i);
      sx += g.at(0, i, j) * static_cast<double>(j);
    }
  return {sy / s, sx / s};
}

}  // namespace

TEST_SUITE("deviation") {
  TEST_CASE("collinear path has no deviation") {
    const auto rep = build_stack(preset("pixel"), {1, 4, 4});
    const Path p = init_linear(oracle::uniform({1, 4, 4}, 1), oracle::uniform({1, 4, 4}, 2), 10);
    const auto prof = deviation_profile(p, rep);
    REQUIRE(prof.knots.size() == 11);
    for (std::size_t n = 0; n <= 10; ++n) {
      CHECK(std::abs(prof.knots[n].deviation) < 1e-12);
      CHECK(prof.knots[n].arc_position == doctest::Approx(n / 10.0));
    }
  }

  TEST_CASE("points on a semicircle") {
    // Responses (1 - cos t, sin t) run from (0, 0) to (2, 0); normalized by
    // the chord length 2.
    std::vector<Tensor> resp;
    for (int n = 0; n <= 8; ++n) {
      const double t = std::numbers::pi * n / 8.0;
      resp.push_back(vec2(1.0 - std::cos(t), std::sin(t)));
    }
    const auto prof = deviation_profile(resp);
    for (int n = 0; n <= 8; ++n) {
      const double t = std::numbers::pi * n / 8.0;
      CHECK(prof.knots[n].arc_position == doctest::Approx((1.0 - std::cos(t)) / 2.0));
      CHECK(prof.knots[n].deviation == doctest::Approx(std::sin(t) / 2.0));
    }
    CHECK(prof.knots.front().deviation == 0.0);
    CHECK(prof.knots.back().deviation == 0.0);
    CHECK(prof.knots.front().arc_position == 0.0);
    CHECK(prof.knots.back().arc_position == 1.0);
    CHECK(prof.max_deviation() == doctest::Approx(0.5));
  }

  TEST_CASE("coincident endpoints are rejected") {
    CHECK_THROWS_AS(deviation_profile(std::vector<Tensor>{vec2(1, 1), vec2(0, 2), vec2(1, 1)}),
                    std::invalid_argument);
  }

  TEST_CASE("orthogonal re-mixing leaves the profile unchanged") {
    const auto rep = build_stack(preset("smallnet_l2"), {1, 16, 16});
    const oracle::RotatedRepresentation rotated(rep, 7);
    Path p = init_linear(oracle::uniform({1, 16, 16}, 3), oracle::uniform({1, 16, 16}, 4), 6);
    p.frames[2] = oracle::uniform({1, 16, 16}, 5);
    const auto a = deviation_profile(p, rep);
    const auto b = deviation_profile(p, rotated);
    for (std::size_t n = 0; n < a.knots.size(); ++n) {
      CHECK(std::abs(a.knots[n].deviation - b.knots[n].deviation) < 1e-8);
      CHECK(std::abs(a.knots[n].arc_position - b.knots[n].arc_position) < 1e-8);
    }
  }

  TEST_CASE("csv") {
    DeviationProfile p;
    p.knots = {{0, 0}, {0.5, 0.25}, {1, 0}};
    CHECK(profile_csv(p).rfind("frame,arc_position,deviation\n", 0) == 0);
  }
}

TEST_SUITE("temporal slice") {
  TEST_CASE("constant path gives identical rows") {
    const Tensor x = oracle::uniform({1, 6, 7}, 1);
    const Tensor s = temporal_slice(init_linear(x, x, 4), SliceAxis::row, 2);
    CHECK(s.shape() == Shape{1, 5, 7});
    for (std::size_t n = 0; n < 5; ++n)
      for (std::size_t j = 0; j < 7; ++j) CHECK(s.at(0, n, j) == x.at(0, 2, j));
  }

  TEST_CASE("integer translation draws diagonal stripes") {
    const Tensor x = oracle::uniform({1, 8, 16}, 2);
    const Path gt = ground_truth_path(TransformSpec::translation(8), x, 8);
    const Tensor s = temporal_slice(gt, SliceAxis::row, 3);
    for (std::size_t n = 0; n <= 8; ++n)
      for (std::size_t j = 0; j < 16; ++j) CHECK(s.at(0, n, (j + n) % 16) == s.at(0, 0, j));
  }

  TEST_CASE("matches direct extraction, both axes") {
    const Path p = init_linear(oracle::uniform({2, 5, 6}, 3), oracle::uniform({2, 5, 6}, 4), 3);
    const Tensor r = temporal_slice(p, SliceAxis::row, 4);
    const Tensor c = temporal_slice(p, SliceAxis::column, 1);
    CHECK(c.shape() == Shape{2, 5, 4});
    for (std::size_t ch = 0; ch < 2; ++ch)
      for (std::size_t n = 0; n < 4; ++n) {
        for (std::size_t j = 0; j < 6; ++j) CHECK(r.at(ch, n, j) == p.frames[n].at(ch, 4, j));
        for (std::size_t i = 0; i < 5; ++i) CHECK(c.at(ch, i, n) == p.frames[n].at(ch, i, 1));
      }
    CHECK_THROWS_AS(temporal_slice(p, SliceAxis::row, 5), std::logic_error);
    CHECK_THROWS_AS(slice_axis_from_string("diagonal"), ConfigError);
  }
}

TEST_SUITE("receptive field") {
  TEST_CASE("1x1 filter has point support") {
    const auto rep = build_stack({"p", std::nullopt, {conv_spec(1, 1, Padding::same, 1)}, std::nullopt},
                                 {1, 9, 9});
    const auto rf = receptive_field(rep, {4, 4}, 8, 0);
    CHECK(rf.size_estimate == 1.0);
    CHECK(rf.grid.at(0, 4, 4) > 0.0);
  }

  TEST_CASE("valid conv then 2x2 max pool covers k + 1 pixels") {
    for (std::size_t k : {3, 5}) {
      CAPTURE(k);
      const StackSpec spec{"rf",
                           std::nullopt,
                           {conv_spec(4, k, Padding::valid, 3), MaxPoolSpec{2, 2}},
                           std::nullopt};
      const auto rep = build_stack(spec, {1, 20, 20});
      const auto rf = receptive_field(rep, {3, 3}, 64, 1);
      std::size_t nonzero_rows = 0, nonzero_cols = 0;
      for (std::size_t i = 0; i < 20; ++i) {
        bool row = false, col = false;
        for (std::size_t j = 0; j < 20; ++j) {
          row |= rf.grid.at(0, i, j) > 0;
          col |= rf.grid.at(0, j, i) > 0;
        }
        nonzero_rows += row;
        nonzero_cols += col;
      }
      CHECK(nonzero_rows == k + 1);
      CHECK(nonzero_cols == k + 1);
      CHECK(std::abs(rf.size_estimate - static_cast<double>(k + 1)) <= 1.0);
    }
  }

  TEST_CASE("conv-only maps shift with the column") {
    const StackSpec spec{"cov", std::nullopt,
                         {conv_spec(3, 3, Padding::same, 4), HalfWaveSpec{}, conv_spec(3, 3, Padding::same, 5)},
                         std::nullopt};
    const auto rep = build_stack(spec, {1, 24, 24});
    const auto a = receptive_field(rep, {8, 8}, 32, 2);
    const auto b = receptive_field(rep, {12, 15}, 32, 2);
    const auto [ay, ax] = centroid(a.grid);
    const auto [by, bx] = centroid(b.grid);
    CHECK(std::abs((by - ay) - 4.0) <= 1.0);
    CHECK(std::abs((bx - ax) - 7.0) <= 1.0);
  }

  TEST_CASE("seeded noise is reproducible") {
    const auto rep = build_stack(preset("smallnet_l2"), {1, 32, 32});
    const auto a = receptive_field(rep, {2, 2}, 4, 9);
    const auto b = receptive_field(rep, {2, 2}, 4, 9);
    CHECK(a.grid == b.grid);
    CHECK(a.size_estimate == b.size_estimate);
    for (double v : a.grid.values()) CHECK(v >= 0.0);
    CHECK_THROWS_AS(receptive_field(rep, {4, 0}, 4, 9), std::logic_error);
  }

  TEST_CASE("mass square") {
    Tensor g({1, 11, 11});
    for (std::size_t i = 3; i < 8; ++i)
      for (std::size_t j = 3; j < 8; ++j) g.at(0, i, j) = 1.0;
    CHECK(mass_square_diameter(g, 0.95) == 5.0);
    CHECK(mass_square_diameter(g, 0.3) == 3.0);
  }
}

TEST_SUITE("rmse") {
  TEST_CASE("self comparison and shared endpoints") {
    const Tensor x = oracle::uniform({1, 16, 16}, 1);
    const Path gt = ground_truth_path(TransformSpec::translation(8), x, 10);
    for (double v : path_rmse(gt, gt)) CHECK(v == 0.0);
    const auto r = path_rmse(init_linear(gt.front(), gt.back(), 10), gt);
    CHECK(r.front() == 0.0);
    CHECK(r.back() == 0.0);
    for (std::size_t n = 1; n < 10; ++n) CHECK(r[n] > 0.0);
  }

  TEST_CASE("matches a direct per-frame norm") {
    Path a{{oracle::uniform({1, 5, 5}, 1), oracle::uniform({1, 5, 5}, 2)}};
    Path b{{oracle::uniform({1, 5, 5}, 3), oracle::uniform({1, 5, 5}, 4)}};
    const auto r = path_rmse(a, b);
    for (std::size_t n = 0; n < 2; ++n) {
      double s = 0;
      for (std::size_t i = 0; i < 25; ++i) s += std::pow(a.frames[n][i] - b.frames[n][i], 2);
      CHECK(r[n] == doctest::Approx(std::sqrt(s / 25)));
    }
    CHECK_THROWS_AS(path_rmse(a, Path{{a.frames[0]}}), std::invalid_argument);
    CHECK(rmse_csv(r).rfind("frame,rmse\n", 0) == 0);
  }
}

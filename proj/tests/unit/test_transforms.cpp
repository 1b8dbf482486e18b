#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "repgeo/error.hpp"
#include "repgeo/metrics.hpp"
#include "repgeo/transforms.hpp"

using namespace repgeo;

namespace {

double rmse(const Tensor& a, const Tensor& b) {
  return std::sqrt(squared_distance(a, b) / static_cast<double>(a.size()));
}

// Smooth radial bump centered on the pixel grid center.
Tensor disk(std::size_t n, double radius) {
  Tensor x({1, n, n});
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::hypot(static_cast<double>(i) - c, static_cast<double>(j) - c);
      x.at(0, i, j) = 0.5 * (1.0 - std::tanh((r - radius) / 3.0));
    }
  return x;
}

// Band-limited pattern that fades out before the border, so zero fill at
// the edges does not enter the comparison.
Tensor smooth_image(std::size_t n) {
  Tensor x({1, n, n});
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double u = static_cast<double>(i), v = static_cast<double>(j);
      const double r = std::hypot(u - c, v - c);
      const double fade = 0.5 * (1.0 - std::tanh((r - 0.35 * static_cast<double>(n)) / 3.0));
      x.at(0, i, j) =
          fade * (0.5 + 0.4 * std::sin(0.41 * u + 0.23 * v) * std::cos(0.37 * v - 0.15 * u));
    }
  return x;
}

}  // namespace

TEST_CASE("fraction zero returns the input exactly") {
  const Tensor x = oracle::uniform({2, 9, 11}, 1);
  for (const auto& spec : {TransformSpec::translation(3.3, -1), TransformSpec::rotation(4),
                           TransformSpec::dilation(1.1)}) {
    CHECK(apply(spec, x, 0.0) == x);
  }
}

TEST_CASE("integer circular translation is an exact roll") {
  const Tensor x = oracle::uniform({1, 16, 20}, 2);
  for (auto interp : {Interpolation::bicubic, Interpolation::bilinear}) {
    auto spec = TransformSpec::translation(8, -3);
    spec.interpolation = interp;
    CHECK(apply(spec, x, 1.0) == oracle::roll(x, -3, 8));
  }
  const auto half = TransformSpec::translation(8, 0);
  CHECK(apply(half, x, 0.5) == oracle::roll(x, 0, 4));
}

TEST_CASE("rotating a centered disk leaves it unchanged") {
  const Tensor x = disk(64, 16);
  CHECK(rmse(apply(TransformSpec::rotation(4), x, 1.0), x) <= 1e-3);
  CHECK(rmse(apply(TransformSpec::rotation(90), x, 1.0), x) <= 1e-3);
}

TEST_CASE("rotation turns counter-clockwise on screen") {
  // A bright dot right of center ends up above center after +90 degrees.
  Tensor x({1, 9, 9});
  x.at(0, 4, 7) = 1.0;
  auto spec = TransformSpec::rotation(90);
  spec.interpolation = Interpolation::bilinear;
  const Tensor y = apply(spec, x, 1.0);
  CHECK(y.at(0, 1, 4) == doctest::Approx(1.0));
}

TEST_CASE("dilation increments are geometric") {
  const Tensor x = disk(48, 10);
  const auto spec = TransformSpec::dilation(1.10);
  const auto path = ground_truth_path(spec, x, 10);
  const auto step = TransformSpec::dilation(std::pow(1.10, 0.1));
  CHECK(rmse(apply(step, x, 1.0), path.frames[1]) < 1e-12);
  CHECK(rmse(apply(TransformSpec::dilation(std::pow(1.10, 0.5)), x, 1.0), path.frames[5]) < 1e-12);
}

TEST_CASE("incremental application composes to the endpoint") {
  const Tensor x = smooth_image(64);
  const TransformSpec specs[] = {TransformSpec::translation(8, 0), TransformSpec::rotation(4),
                                 TransformSpec::dilation(1.10)};
  for (const auto& spec : specs) {
    CAPTURE(to_string(spec.kind));
    Tensor step = x;
    for (int n = 0; n < 10; ++n) step = apply(spec, step, 0.1);
    CHECK(rmse(step, apply(spec, x, 1.0)) <= 2e-2);
  }
  auto dilate = TransformSpec::dilation(1.10);
  Tensor step = disk(48, 10);
  for (int n = 0; n < 10; ++n) step = apply(dilate, step, 0.1);
  CHECK(rmse(step, apply(dilate, disk(48, 10), 1.0)) <= 1e-3);
}

TEST_CASE("ground truth path") {
  const Tensor x = oracle::uniform({1, 20, 20}, 5);
  const auto path = ground_truth_path(TransformSpec::translation(8), x, 10);
  REQUIRE(path.frames.size() == 11);
  CHECK(path.front() == x);
  CHECK(path.frames[5] == oracle::roll(x, 0, 4));
  CHECK(path.back() == oracle::roll(x, 0, 8));
  const auto pair = ground_truth_path(TransformSpec::rotation(4), x, 1);
  CHECK(pair.frames.size() == 2);
  CHECK_THROWS_AS(ground_truth_path(TransformSpec::rotation(4), x, 0), ConfigError);
}

TEST_CASE("outputs stay in the unit interval") {
  const Tensor x = oracle::uniform({1, 24, 24}, 6);
  for (auto b : {Boundary::circular, Boundary::zero, Boundary::reflect}) {
    auto spec = TransformSpec::rotation(17);
    spec.boundary = b;
    const Tensor y = apply(spec, x, 1.0);
    for (double v : y.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("reflect boundary mirrors including the edge sample") {
  Tensor x({1, 1, 4}, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  auto spec = TransformSpec::translation(2, 0);
  spec.boundary = Boundary::reflect;
  const Tensor y = apply(spec, x, 1.0);
  CHECK(y[0] == doctest::Approx(0.2));
  CHECK(y[1] == doctest::Approx(0.1));
  CHECK(y[2] == doctest::Approx(0.1));
}

TEST_CASE("invalid specs are rejected") {
  const Tensor x({1, 4, 4});
  CHECK_THROWS_AS(apply(TransformSpec::dilation(0.0), x, 1.0), ConfigError);
  CHECK_THROWS_AS(apply(TransformSpec::rotation(-180), x, 1.0), ConfigError);
  CHECK_NOTHROW(apply(TransformSpec::rotation(180), x, 1.0));
  CHECK_THROWS_AS(apply(TransformSpec::rotation(4), x, 1.5), ConfigError);
  CHECK_THROWS_AS(transform_kind_from_string("shear"), ConfigError);
}

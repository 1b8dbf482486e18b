#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "repgeo/path.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo {

enum class TransformKind { translate, rotate, dilate };
enum class Boundary { circular, zero, reflect };
enum class Interpolation { bilinear, bicubic };

std::string_view to_string(TransformKind kind);
std::string_view to_string(Boundary boundary);
std::string_view to_string(Interpolation interpolation);
TransformKind transform_kind_from_string(std::string_view name);
Boundary boundary_from_string(std::string_view name);
Interpolation interpolation_from_string(std::string_view name);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// A parametric geometric transformation at full magnitude. Translation is
/// in pixels (+x right, +y down); rotation in degrees, counter-clockwise as
/// displayed; dilation is a scale factor. Rotation and dilation act about
/// `center`, which defaults to the image center.
struct TransformSpec {
  TransformKind kind = TransformKind::translate;
  double dx = 0.0;
  double dy = 0.0;
  double degrees = 0.0;
  double scale = 1.0;
  std::optional<Point2> center;
  Boundary boundary = Boundary::circular;
  Interpolation interpolation = Interpolation::bicubic;

  static TransformSpec translation(double dx, double dy = 0.0);
  static TransformSpec rotation(double degrees);
  static TransformSpec dilation(double scale);

  /// Throws ConfigError for a nonpositive scale or an angle outside (-180, 180].
  void validate() const;
};

/// Resamples x under the transform scaled by `fraction` in [0, 1]:
/// translation and rotation scale linearly, dilation geometrically
/// (scale^fraction). Output is clamped to [0, 1]; fraction 0 returns x.
Tensor apply(const TransformSpec& spec, const Tensor& x, double fraction);

/// Frames apply(spec, x0, n / N) for n = 0..N, each resampled from x0.
Path ground_truth_path(const TransformSpec& spec, const Tensor& x0, std::size_t steps);

}  // namespace repgeo

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "repgeo/layers.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo {

struct GradientCheckOptions {
  double step = 1e-5;
  /// Coordinates probed by finite differences; 0 probes every coordinate.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
  /// Coordinates that fail are probed again with step / 10, this many times.
  /// A kink closer to x than `step` spoils only the coarser difference; a
  /// wrong derivative fails at every step.
  std::size_t refinements = 1;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  std::size_t coordinates_checked = 0;
  std::size_t worst_coordinate = 0;
  /// Coordinates that needed a refined step to pass.
  std::size_t refined_coordinates = 0;
  bool passed = false;
};

using ForwardFn = std::function<Tensor(const Tensor&)>;
using VjpFn = std::function<Tensor(const Tensor&, const Tensor&)>;

/// Compares vjp(x, c) against central differences of <forward(x), c> for a
/// seeded random cotangent c. Per coordinate the error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-2 * max|numeric|).
///
/// The caller must keep x away from points where forward is not
/// differentiable (max-pool ties, rectifier zeros, zero DFT bins); the check
/// cannot tell a kink from a wrong derivative.
GradientCheckReport gradient_check(const ForwardFn& forward, const VjpFn& vjp, const Tensor& x,
                                   double tolerance, const GradientCheckOptions& options = {});

GradientCheckReport gradient_check(const Layer& layer, const Tensor& x, double tolerance,
                                   const GradientCheckOptions& options = {});

}  // namespace repgeo

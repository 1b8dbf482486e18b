#include "repgeo/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace repgeo {

GradientCheckReport gradient_check(const ForwardFn& forward, const VjpFn& vjp, const Tensor& x,
                                   double tolerance, const GradientCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;

  const Tensor y = forward(x);
  Tensor cot(y.shape());
  for (auto& v : cot.storage()) v = normal(rng);
  const Tensor analytic = vjp(x, cot);

  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coordinates > 0 && options.max_coordinates < coords.size()) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  Tensor probe = x;
  auto central = [&](std::size_t i, double h) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double plus = dot(forward(probe), cot);
    probe[i] = orig - h;
    const double minus = dot(forward(probe), cot);
    probe[i] = orig;
    return (plus - minus) / (2.0 * h);
  };
  std::vector<double> numeric(coords.size());
  for (std::size_t k = 0; k < coords.size(); ++k) numeric[k] = central(coords[k], options.step);

  double scale = 0.0;
  for (double v : numeric) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-2 * scale, 1e-300);
  auto error = [&](double a, double n) {
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    return std::isfinite(err) ? err : INFINITY;
  };

  GradientCheckReport report;
  report.tolerance = tolerance;
  report.coordinates_checked = coords.size();
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double a = analytic[coords[k]];
    double err = error(a, numeric[k]);
    double h = options.step;
    for (std::size_t r = 0; r < options.refinements && err > tolerance; ++r) {
      h /= 10.0;
      err = error(a, central(coords[k], h));
      if (err <= tolerance) ++report.refined_coordinates;
    }
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_coordinate = coords[k];
    }
  }
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

GradientCheckReport gradient_check(const Layer& layer, const Tensor& x, double tolerance,
                                   const GradientCheckOptions& options) {
  return gradient_check([&](const Tensor& t) { return layer.forward(t); },
                        [&](const Tensor& t, const Tensor& c) { return layer.vjp(t, c); }, x,
                        tolerance, options);
}

}  // namespace repgeo

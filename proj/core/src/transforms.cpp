#include "repgeo/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "repgeo/error.hpp"

namespace repgeo {

namespace {

// Keys cubic convolution kernel, a = -0.5.
double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

// Maps an integer sample index into [0, n) or returns -1 for zero fill.
std::ptrdiff_t boundary_index(std::ptrdiff_t i, std::ptrdiff_t n, Boundary boundary) {
  if (i >= 0 && i < n) return i;
  switch (boundary) {
    case Boundary::circular: {
      const std::ptrdiff_t m = i % n;
      return m < 0 ? m + n : m;
    }
    case Boundary::zero:
      return -1;
    case Boundary::reflect: {
      // Edge-inclusive mirror: -1 -> 0, n -> n - 1.
      const std::ptrdiff_t period = 2 * n;
      std::ptrdiff_t m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - 1 - m;
    }
  }
  return -1;
}

double sample(const double* plane, std::ptrdiff_t h, std::ptrdiff_t w, double sx, double sy,
              Boundary boundary, Interpolation interpolation) {
  const double fx = std::floor(sx), fy = std::floor(sy);
  const double tx = sx - fx, ty = sy - fy;
  const auto ix = static_cast<std::ptrdiff_t>(fx), iy = static_cast<std::ptrdiff_t>(fy);

  auto pixel = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
    const auto by = boundary_index(y, h, boundary);
    const auto bx = boundary_index(x, w, boundary);
    return (by < 0 || bx < 0) ? 0.0 : plane[by * w + bx];
  };

  if (interpolation == Interpolation::bilinear) {
    return (1.0 - ty) * ((1.0 - tx) * pixel(iy, ix) + tx * pixel(iy, ix + 1)) +
           ty * ((1.0 - tx) * pixel(iy + 1, ix) + tx * pixel(iy + 1, ix + 1));
  }
  std::array<double, 4> wx{}, wy{};
  for (int k = 0; k < 4; ++k) {
    wx[k] = cubic_weight(tx - (k - 1));
    wy[k] = cubic_weight(ty - (k - 1));
  }
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    if (wy[j] == 0.0) continue;
    double row = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (wx[k] != 0.0) row += wx[k] * pixel(iy + j - 1, ix + k - 1);
    }
    acc += wy[j] * row;
  }
  return acc;
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::translate: return "translate";
    case TransformKind::rotate: return "rotate";
    case TransformKind::dilate: return "dilate";
  }
  return "translate";
}

std::string_view to_string(Boundary boundary) {
  switch (boundary) {
    case Boundary::circular: return "circular";
    case Boundary::zero: return "zero";
    case Boundary::reflect: return "reflect";
  }
  return "circular";
}

std::string_view to_string(Interpolation interpolation) {
  return interpolation == Interpolation::bicubic ? "bicubic" : "bilinear";
}

TransformKind transform_kind_from_string(std::string_view name) {
  if (name == "translate") return TransformKind::translate;
  if (name == "rotate") return TransformKind::rotate;
  if (name == "dilate") return TransformKind::dilate;
  throw ConfigError("unknown transform kind '" + std::string(name) + "'");
}

Boundary boundary_from_string(std::string_view name) {
  if (name == "circular") return Boundary::circular;
  if (name == "zero") return Boundary::zero;
  if (name == "reflect") return Boundary::reflect;
  throw ConfigError("unknown boundary policy '" + std::string(name) + "'");
}

Interpolation interpolation_from_string(std::string_view name) {
  if (name == "bicubic") return Interpolation::bicubic;
  if (name == "bilinear") return Interpolation::bilinear;
  throw ConfigError("unknown interpolation '" + std::string(name) + "'");
}

TransformSpec TransformSpec::translation(double dx, double dy) {
  TransformSpec s;
  s.kind = TransformKind::translate;
  s.dx = dx;
  s.dy = dy;
  s.boundary = Boundary::circular;
  return s;
}

TransformSpec TransformSpec::rotation(double degrees) {
  TransformSpec s;
  s.kind = TransformKind::rotate;
  s.degrees = degrees;
  s.boundary = Boundary::zero;
  return s;
}

TransformSpec TransformSpec::dilation(double scale) {
  TransformSpec s;
  s.kind = TransformKind::dilate;
  s.scale = scale;
  s.boundary = Boundary::zero;
  return s;
}

void TransformSpec::validate() const {
  if (!std::isfinite(dx) || !std::isfinite(dy)) {
    throw ConfigError("translation offsets must be finite");
  }
  if (kind == TransformKind::dilate && !(scale > 0.0 && std::isfinite(scale))) {
    throw ConfigError("dilation scale must be positive, got " + std::to_string(scale));
  }
  if (kind == TransformKind::rotate && !(degrees > -180.0 && degrees <= 180.0)) {
    throw ConfigError("rotation angle must lie in (-180, 180], got " + std::to_string(degrees));
  }
}

Tensor apply(const TransformSpec& spec, const Tensor& x, double fraction) {
  spec.validate();
  if (x.rank() != 3) {
    throw ShapeError("apply: expected an image tensor, got " + shape_to_string(x.shape()));
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ConfigError("apply: fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  if (fraction == 0.0) return x;

  const std::size_t C = x.channels(), H = x.height(), W = x.width();
  const Point2 center =
      spec.center.value_or(Point2{(static_cast<double>(W) - 1.0) / 2.0,
                                  (static_cast<double>(H) - 1.0) / 2.0});

  // Inverse map: output pixel (px, py) reads the source at (sx, sy).
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0, ox = 0.0, oy = 0.0;
  switch (spec.kind) {
    case TransformKind::translate:
      ox = -spec.dx * fraction;
      oy = -spec.dy * fraction;
      break;
    case TransformKind::rotate: {
      // Counter-clockwise on screen with y pointing down.
      const double th = spec.degrees * fraction * std::numbers::pi / 180.0;
      const double c = std::cos(th), s = std::sin(th);
      a11 = c;
      a12 = -s;
      a21 = s;
      a22 = c;
      break;
    }
    case TransformKind::dilate: {
      const double inv = std::pow(spec.scale, -fraction);
      a11 = a22 = inv;
      break;
    }
  }

  Tensor y(x.shape());
  const auto h = static_cast<std::ptrdiff_t>(H), w = static_cast<std::ptrdiff_t>(W);
  for (std::size_t c = 0; c < C; ++c) {
    const double* plane = x.data() + c * H * W;
    double* out = y.data() + c * H * W;
    for (std::size_t py = 0; py < H; ++py) {
      for (std::size_t px = 0; px < W; ++px) {
        const double rx = static_cast<double>(px) - center.x;
        const double ry = static_cast<double>(py) - center.y;
        const double sx = center.x + a11 * rx + a12 * ry + ox;
        const double sy = center.y + a21 * rx + a22 * ry + oy;
        const double v = sample(plane, h, w, sx, sy, spec.boundary, spec.interpolation);
        out[py * W + px] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return y;
}

Path ground_truth_path(const TransformSpec& spec, const Tensor& x0, std::size_t steps) {
  if (steps < 1) throw ConfigError("ground_truth_path: need at least one step");
  Path path;
  path.frames.reserve(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    path.frames.push_back(
        apply(spec, x0, static_cast<double>(n) / static_cast<double>(steps)));
  }
  return path;
}

}  // namespace repgeo

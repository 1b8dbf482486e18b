#include "repgeo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "repgeo/error.hpp"
#include "repgeo/geodesic.hpp"

namespace repgeo {

double DeviationProfile::max_deviation() const {
  double m = 0.0;
  for (const auto& k : knots) m = std::max(m, k.deviation);
  return m;
}

DeviationProfile deviation_profile(const std::vector<Tensor>& ys) {
  if (ys.size() < 2) throw ShapeError("deviation_profile: need at least two responses");
  const Tensor& first = ys.front();
  const Tensor chord = ys.back() - first;
  const double chord2 = squared_norm(chord);
  if (!(chord2 > 0.0)) {
    throw std::invalid_argument("deviation_profile: endpoint responses coincide");
  }
  const double chord_len = std::sqrt(chord2);

  DeviationProfile profile;
  profile.knots.reserve(ys.size());
  for (std::size_t n = 0; n < ys.size(); ++n) {
    if (n == 0) {
      profile.knots.push_back({0.0, 0.0});
      continue;
    }
    if (n + 1 == ys.size()) {
      profile.knots.push_back({1.0, 0.0});
      continue;
    }
    const Tensor u = ys[n] - first;
    const double along = dot(u, chord) / chord2;
    double perp2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = u[i] - along * chord[i];
      perp2 += r * r;
    }
    profile.knots.push_back({along, std::sqrt(perp2) / chord_len});
  }
  return profile;
}

DeviationProfile deviation_profile(const Path& path, const Representation& rep) {
  return deviation_profile(responses(path, rep));
}

SliceAxis slice_axis_from_string(std::string_view name) {
  if (name == "row") return SliceAxis::row;
  if (name == "column" || name == "col") return SliceAxis::column;
  throw ConfigError("unknown slice axis '" + std::string(name) + "'");
}

Tensor temporal_slice(const Path& path, SliceAxis axis, std::size_t index) {
  validate_path(path);
  const Tensor& f0 = path.front();
  if (f0.rank() != 3) throw ShapeError("temporal_slice: frames must be images");
  const std::size_t C = f0.channels(), H = f0.height(), W = f0.width();
  const std::size_t T = path.frames.size();
  const std::size_t bound = axis == SliceAxis::row ? H : W;
  if (index >= bound) {
    throw std::out_of_range("temporal_slice: index " + std::to_string(index) +
                            " outside [0, " + std::to_string(bound) + ")");
  }
  if (axis == SliceAxis::row) {
    Tensor s({C, T, W});
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t n = 0; n < T; ++n)
        for (std::size_t x = 0; x < W; ++x) s.at(c, n, x) = path.frames[n].at(c, index, x);
    return s;
  }
  Tensor s({C, H, T});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t n = 0; n < T; ++n) s.at(c, y, n) = path.frames[n].at(c, y, index);
  return s;
}

double mass_square_diameter(const Tensor& grid, double fraction) {
  if (grid.rank() != 3 || grid.channels() != 1) {
    throw ShapeError("mass_square_diameter: expected a (1, H, W) map");
  }
  const std::size_t H = grid.height(), W = grid.width();
  double total = 0.0, cy = 0.0, cx = 0.0;
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      const double m = grid.at(0, y, x);
      total += m;
      cy += m * static_cast<double>(y);
      cx += m * static_cast<double>(x);
    }
  }
  if (!(total > 0.0)) throw std::invalid_argument("mass_square_diameter: map has no mass");
  cy /= total;
  cx /= total;

  // Summed-area table with a zero border.
  std::vector<double> sat((H + 1) * (W + 1), 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      sat[(y + 1) * (W + 1) + x + 1] = grid.at(0, y, x) + sat[y * (W + 1) + x + 1] +
                                       sat[(y + 1) * (W + 1) + x] - sat[y * (W + 1) + x];
    }
  }
  auto box = [&](std::ptrdiff_t y0, std::ptrdiff_t x0, std::ptrdiff_t side) {
    const auto clampi = [](std::ptrdiff_t v, std::ptrdiff_t hi) {
      return std::clamp<std::ptrdiff_t>(v, 0, hi);
    };
    const auto ya = clampi(y0, H), yb = clampi(y0 + side, H);
    const auto xa = clampi(x0, W), xb = clampi(x0 + side, W);
    const auto w1 = static_cast<std::ptrdiff_t>(W + 1);
    return sat[yb * w1 + xb] - sat[ya * w1 + xb] - sat[yb * w1 + xa] + sat[ya * w1 + xa];
  };

  const double target = fraction * total;
  const std::size_t max_side = 2 * std::max(H, W);
  for (std::size_t side = 1; side <= max_side; ++side) {
    const double half = (static_cast<double>(side) - 1.0) / 2.0;
    const auto y_lo = static_cast<std::ptrdiff_t>(std::floor(cy - half));
    const auto x_lo = static_cast<std::ptrdiff_t>(std::floor(cx - half));
    const auto s = static_cast<std::ptrdiff_t>(side);
    double best = 0.0;
    for (std::ptrdiff_t dy = 0; dy <= 1; ++dy)
      for (std::ptrdiff_t dx = 0; dx <= 1; ++dx) best = std::max(best, box(y_lo + dy, x_lo + dx, s));
    if (best >= target * (1.0 - 1e-12)) return static_cast<double>(side);
  }
  return static_cast<double>(max_side);
}

RFMap receptive_field(const LayerStack& rep, FeatureLocation location, std::size_t n_noise,
                      std::uint64_t seed) {
  if (n_noise < 1) throw ConfigError("receptive_field: need at least one noise image");
  const Shape& fs = rep.feature_shape();
  if (fs.size() != 3 || location.y >= fs[1] || location.x >= fs[2]) {
    throw std::out_of_range("receptive_field: location (" + std::to_string(location.y) + ", " +
                            std::to_string(location.x) + ") outside feature grid " +
                            shape_to_string(fs));
  }
  const Shape& in = rep.input_shape();
  const std::size_t C = in[0], H = in[1], W = in[2];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Tensor grid({1, H, W});
  Tensor noise(in);
  Tensor onehot({rep.dimension()});
  for (std::size_t draw = 0; draw < n_noise; ++draw) {
    for (auto& v : noise.storage()) v = uniform(rng);
    const auto lin = rep.linearize(noise);
    for (std::size_t c = 0; c < fs[0]; ++c) {
      const std::size_t unit = (c * fs[1] + location.y) * fs[2] + location.x;
      onehot.fill(0.0);
      onehot[unit] = 1.0;
      const Tensor g = lin.pullback(onehot);
      for (std::size_t ch = 0; ch < C; ++ch)
        for (std::size_t i = 0; i < H * W; ++i) grid[i] += std::abs(g[ch * H * W + i]);
    }
  }
  grid *= 1.0 / static_cast<double>(n_noise * fs[0]);
  RFMap map;
  map.size_estimate = mass_square_diameter(grid);
  map.grid = std::move(grid);
  return map;
}

std::vector<double> path_rmse(const Path& path, const Path& reference) {
  validate_path(path);
  validate_path(reference);
  if (path.frames.size() != reference.frames.size()) {
    throw ShapeError("path_rmse: paths have " + std::to_string(path.frames.size()) + " and " +
                     std::to_string(reference.frames.size()) + " frames");
  }
  std::vector<double> out;
  out.reserve(path.frames.size());
  for (std::size_t n = 0; n < path.frames.size(); ++n) {
    out.push_back(std::sqrt(squared_distance(path.frames[n], reference.frames[n]) /
                            static_cast<double>(path.frames[n].size())));
  }
  return out;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

std::string profile_csv(const DeviationProfile& profile) {
  std::ostringstream os;
  os.precision(17);
  os << "frame,arc_position,deviation\n";
  for (std::size_t n = 0; n < profile.knots.size(); ++n) {
    os << n << ',' << profile.knots[n].arc_position << ',' << profile.knots[n].deviation << '\n';
  }
  return os.str();
}

std::string rmse_csv(const std::vector<double>& rmse) {
  std::ostringstream os;
  os.precision(17);
  os << "frame,rmse\n";
  for (std::size_t n = 0; n < rmse.size(); ++n) os << n << ',' << rmse[n] << '\n';
  return os.str();
}

}  // namespace repgeo

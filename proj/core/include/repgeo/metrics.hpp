#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "repgeo/path.hpp"
#include "repgeo/stack.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo {

struct DeviationKnot {
  double arc_position = 0.0;
  double deviation = 0.0;
};

/// Position of each frame's response relative to the straight line from the
/// first to the last response, both coordinates in units of the endpoint
/// distance. One knot per frame.
struct DeviationProfile {
  std::vector<DeviationKnot> knots;

  double max_deviation() const;
};

/// Throws std::invalid_argument if the endpoint responses coincide.
DeviationProfile deviation_profile(const std::vector<Tensor>& responses);
DeviationProfile deviation_profile(const Path& path, const Representation& rep);

enum class SliceAxis { row, column };
SliceAxis slice_axis_from_string(std::string_view name);

/// For SliceAxis::row, output (C, N + 1, W) whose row n is row `index` of
/// frame n; for SliceAxis::column, output (C, H, N + 1) whose column n is
/// column `index` of frame n.
Tensor temporal_slice(const Path& path, SliceAxis axis, std::size_t index);

struct RFMap {
  /// (1, H, W) mean absolute gradient, summed over input channels.
  Tensor grid;
  double size_estimate = 0.0;
};

struct FeatureLocation {
  std::size_t y = 0;
  std::size_t x = 0;
};

/// Averages |d unit / d image| over `n_noise` seeded uniform [0,1] noise
/// images and over every channel of the tapped feature map at `location`.
RFMap receptive_field(const LayerStack& rep, FeatureLocation location, std::size_t n_noise,
                      std::uint64_t seed);

/// Side length of the smallest square centered on the map's centroid that
/// holds at least `fraction` of its mass.
double mass_square_diameter(const Tensor& grid, double fraction = 0.95);

/// Root-mean-square pixel difference per frame.
std::vector<double> path_rmse(const Path& path, const Path& reference);
double mean(const std::vector<double>& values);

std::string profile_csv(const DeviationProfile& profile);
std::string rmse_csv(const std::vector<double>& rmse);

}  // namespace repgeo

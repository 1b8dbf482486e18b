#pragma once

#include <cstddef>
#include <vector>

#include "repgeo/tensor.hpp"

namespace repgeo {

/// Ordered image sequence x_0 .. x_N; all frames share one shape.
struct Path {
  std::vector<Tensor> frames;

  std::size_t steps() const { return frames.empty() ? 0 : frames.size() - 1; }
  const Tensor& front() const { return frames.front(); }
  const Tensor& back() const { return frames.back(); }
};

/// Same layout as a Path; used for gradients and descent directions over
/// the whole sequence.
using PathField = std::vector<Tensor>;

/// Throws ShapeError unless the path is non-empty with one common frame shape.
void validate_path(const Path& path);

double dot(const PathField& a, const PathField& b);
double squared_norm(const PathField& a);

}  // namespace repgeo

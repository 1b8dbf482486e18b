#pragma once

#include <stdexcept>
#include <string>

namespace repgeo {

/// Invalid layer, stack, transform or optimizer configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor shapes that do not agree with what an operation expects.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace repgeo

#pragma once

#include <filesystem>
#include <stdexcept>

#include "repgeo/tensor.hpp"

namespace repgeo {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads an 8- or 16-bit grayscale or RGB PNG (alpha is dropped) into a
/// (C, H, W) tensor with values in [0, 1].
Tensor read_png(const std::filesystem::path& file);

/// Writes a 1- or 3-channel tensor as PNG; values are clamped to [0, 1]
/// and rounded to `bit_depth` (8 or 16) bits.
void write_png(const std::filesystem::path& file, const Tensor& image, int bit_depth = 8);

/// Reads `.tensor` containers verbatim and anything else as PNG.
Tensor load_image(const std::filesystem::path& file);

/// Min-max normalizes a (1, H, W) map into [0, 1] for display.
Tensor normalize_for_display(const Tensor& map);

}  // namespace repgeo

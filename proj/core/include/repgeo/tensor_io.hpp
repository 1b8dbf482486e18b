#pragma once

#include <filesystem>
#include <string>

#include "repgeo/tensor.hpp"

namespace repgeo {

/// Lossless binary tensor container, little-endian:
///
///   offset 0   char[8]   magic "RGTENSOR"
///   offset 8   uint32    format version (1)
///   offset 12  uint32    dtype code (1 = float64)
///   offset 16  uint64    rank r
///   offset 24  uint64[r] extents
///   then       float64[prod(extents)] row-major values
void write_tensor(const std::filesystem::path& file, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& file);

std::string encode_tensor(const Tensor& tensor);
Tensor decode_tensor(const std::string& bytes);

}  // namespace repgeo

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "repgeo/image_io.hpp"
#include "repgeo/tensor.hpp"

#ifndef REPGEO_ASSET_DIR
#error "REPGEO_ASSET_DIR must point at the assets directory"
#endif

namespace test_assets {

inline std::filesystem::path asset_dir() { return REPGEO_ASSET_DIR; }

inline const std::vector<std::string>& natural_names() {
  static const std::vector<std::string> names{"astronaut", "camera", "coffee", "chelsea",
                                              "rocket"};
  return names;
}

inline repgeo::Tensor natural_image(std::size_t index) {
  return repgeo::read_png(asset_dir() / "natural" / (natural_names().at(index) + ".png"));
}

// size x size window of `image` at a position drawn from mt19937_64(seed).
inline repgeo::Tensor seeded_crop(const repgeo::Tensor& image, std::size_t size,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t y = rng() % (image.height() - size);
  const std::size_t x = rng() % (image.width() - size);
  repgeo::Tensor crop({1, size, size});
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) crop.at(0, i, j) = image.at(0, y + i, x + j);
  return crop;
}

// Crop k of image k, the five pairs used for the pooling comparison.
inline repgeo::Tensor comparison_crop(std::size_t k, std::size_t size = 64) {
  return seeded_crop(natural_image(k), size, k);
}

// `per_image` crops from every natural image, seeds 0, 1, ...
inline std::vector<repgeo::Tensor> natural_crops(std::size_t size, std::size_t per_image) {
  std::vector<repgeo::Tensor> out;
  for (std::size_t k = 0; k < natural_names().size(); ++k) {
    const auto image = natural_image(k);
    for (std::size_t s = 0; s < per_image; ++s) out.push_back(seeded_crop(image, size, 100 + s));
  }
  return out;
}

}  // namespace test_assets

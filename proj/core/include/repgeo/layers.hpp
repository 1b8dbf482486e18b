#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "repgeo/tensor.hpp"

namespace repgeo {

enum class Padding { valid, same };

std::string_view to_string(Padding padding);
Padding padding_from_string(std::string_view name);

/// Cross-correlation with a (out_channels, in_channels, kh, kw) filter bank.
struct Conv2d {
  Tensor filters;
  std::size_t stride = 1;
  Padding padding = Padding::same;
};

/// max(x, 0).
struct HalfWave {};

struct MaxPool {
  std::size_t extent = 2;
  std::size_t stride = 2;
};

/// sqrt(g * x^2 + eps) evaluated on a stride-subsampled grid. The
/// (kh, kw) kernel must be nonnegative with unit sum.
struct L2Pool {
  Tensor kernel;
  std::size_t stride = 2;
  double eps = 1e-10;
};

/// Per-channel modulus of the 2D DFT. Bins with modulus below `guard`
/// contribute no gradient.
struct FourierMagnitude {
  double guard = 1e-12;
};

struct Identity {};

/// out[c] = scale * in[permutation[c]] - means[c].
struct AffinePreprocess {
  double scale = 1.0;
  std::vector<std::size_t> permutation;
  std::vector<double> means;
};

enum class LayerKind {
  conv2d,
  halfwave,
  maxpool,
  l2pool,
  fourier_magnitude,
  identity,
  affine_preprocess,
};

std::string_view to_string(LayerKind kind);

/// One differentiable stage of a representation. Parameters are validated
/// on construction; forward/vjp are pure.
class Layer {
 public:
  using Params = std::variant<Conv2d, HalfWave, MaxPool, L2Pool, FourierMagnitude, Identity,
                              AffinePreprocess>;

  Layer(Params params);  // NOLINT(google-explicit-constructor)

  LayerKind kind() const;
  const Params& params() const { return params_; }

  /// Throws ShapeError when `input` is not acceptable for this layer.
  Shape output_shape(const Shape& input) const;
  Tensor forward(const Tensor& x) const;
  /// Vector-Jacobian product at x. The result has the shape of x.
  Tensor vjp(const Tensor& x, const Tensor& cotangent) const;
  /// Same, reusing y = forward(x) where the layer can exploit it.
  Tensor vjp(const Tensor& x, const Tensor& y, const Tensor& cotangent) const;

 private:
  Params params_;
};

Tensor conv2d_forward(const Tensor& x, const Tensor& filters, std::size_t stride,
                      Padding padding);
Tensor conv2d_vjp(const Tensor& x, const Tensor& filters, std::size_t stride, Padding padding,
                  const Tensor& cotangent);

Tensor halfwave_forward(const Tensor& x);
Tensor halfwave_vjp(const Tensor& x, const Tensor& cotangent);

Tensor maxpool_forward(const Tensor& x, std::size_t extent, std::size_t stride);
/// Each cotangent entry goes to the first row-major maximum of its block.
Tensor maxpool_vjp(const Tensor& x, std::size_t extent, std::size_t stride,
                   const Tensor& cotangent);

Tensor l2pool_forward(const Tensor& x, const Tensor& kernel, std::size_t stride, double eps);
Tensor l2pool_vjp(const Tensor& x, const Tensor& kernel, std::size_t stride, double eps,
                  const Tensor& cotangent);
/// Overload taking the already computed forward output `y`.
Tensor l2pool_vjp(const Tensor& x, const Tensor& y, const Tensor& kernel, std::size_t stride,
                  const Tensor& cotangent);

Tensor fourier_magnitude_forward(const Tensor& x);
Tensor fourier_magnitude_vjp(const Tensor& x, const Tensor& cotangent, double guard = 1e-12);

Tensor vjp(const Layer& layer, const Tensor& x, const Tensor& cotangent);

/// Separable Hann window w(i) = 0.5 (1 - cos(2 pi i / (M - 1))) as an
/// (extent, extent) kernel normalized to unit sum.
Tensor hanning_kernel(std::size_t extent);

}  // namespace repgeo

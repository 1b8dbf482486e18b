#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "repgeo/layers.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo {

/// Rescale, permute and mean-subtract color channels before the first layer.
struct PreprocessSpec {
  double scale = 255.0;
  std::vector<std::size_t> channel_permutation{2, 1, 0};
  std::vector<double> channel_means{104.0, 117.0, 124.0};

  /// [0,1] RGB -> [0,255] BGR minus the mean BGR pixel value.
  static PreprocessSpec vgg() { return {}; }
};

/// How a convolution's filter bank is populated once the input channel
/// count is known.
struct FilterBank {
  enum class Source {
    /// i.i.d. normal weights scaled by 1/sqrt(fan_in), from `seed`.
    seeded,
    /// Even/odd Gabor pairs at `orientations` angles, remaining filters seeded.
    oriented,
    /// Weights given verbatim in `weights`, (out, in, kh, kw) row-major.
    explicit_weights,
  };
  Source source = Source::seeded;
  std::uint64_t seed = 0;
  std::size_t orientations = 4;
  std::vector<double> weights;
};

struct ConvSpec {
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  Padding padding = Padding::same;
  FilterBank bank;
};
struct HalfWaveSpec {};
struct MaxPoolSpec {
  std::size_t extent = 2;
  std::size_t stride = 2;
};
/// L2 pooling with an extent x extent unit-sum Hann window.
struct L2PoolSpec {
  std::size_t extent = 6;
  std::size_t stride = 2;
  double eps = 1e-10;
};
struct FourierMagnitudeSpec {};
struct IdentitySpec {};

using LayerSpec =
    std::variant<ConvSpec, HalfWaveSpec, MaxPoolSpec, L2PoolSpec, FourierMagnitudeSpec, IdentitySpec>;

struct StackSpec {
  std::string name;
  std::optional<PreprocessSpec> preprocess;
  std::vector<LayerSpec> layers;
  /// Index into `layers` whose output is the representation; last if unset.
  std::optional<std::size_t> tap;
};

/// Value of f at a point together with its vector-Jacobian product.
struct Linearization {
  Tensor value;  // flat response vector
  std::function<Tensor(const Tensor&)> pullback;
};

/// A differentiable map from images of a fixed shape to flat response
/// vectors. Implementations are immutable and safe to share across threads.
class Representation {
 public:
  virtual ~Representation() = default;

  virtual const Shape& input_shape() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Tensor evaluate(const Tensor& x) const = 0;
  virtual Linearization linearize(const Tensor& x) const = 0;

  /// Gradient of <f(x), cotangent> with respect to x.
  virtual Tensor pullback(const Tensor& x, const Tensor& cotangent) const {
    return linearize(x).pullback(cotangent);
  }
};

/// A chain of layers, optionally preceded by affine preprocessing.
class LayerStack final : public Representation {
 public:
  LayerStack(std::string name, Shape input_shape, std::vector<Layer> layers);

  const std::string& name() const { return name_; }
  const Shape& input_shape() const override { return input_shape_; }
  /// Shape of the tapped feature map before flattening.
  const Shape& feature_shape() const { return shapes_.back(); }
  std::size_t dimension() const override { return shape_numel(shapes_.back()); }
  const std::vector<Layer>& layers() const { return layers_; }
  /// Input shape of layer i; entry layers().size() is the output shape.
  const std::vector<Shape>& shapes() const { return shapes_; }

  Tensor evaluate(const Tensor& x) const override;
  Linearization linearize(const Tensor& x) const override;
  Tensor pullback(const Tensor& x, const Tensor& cotangent) const override;

 private:
  std::vector<Tensor> activations(const Tensor& x) const;
  Tensor backward(const std::vector<Tensor>& acts, const Tensor& cotangent) const;
  void require_input(const Tensor& x) const;

  std::string name_;
  Shape input_shape_;
  std::vector<Layer> layers_;
  std::vector<Shape> shapes_;
};

/// Materializes `spec` for images of `input_shape`. Throws ShapeError naming
/// the first layer whose input shape is unacceptable.
LayerStack build_stack(const StackSpec& spec, const Shape& input_shape);

/// Named stacks: pixel, fourier_mag, smallnet_max, smallnet_l2,
/// smallnet_l2_pool1_36, smallnet_l2_pool2_18. Throws ConfigError otherwise.
StackSpec preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Seed used for every seeded filter bank in the smallnet presets.
inline constexpr std::uint64_t kSmallnetSeed = 20160201;

/// Filter bank for `spec` with the given number of input channels.
Tensor make_filters(const ConvSpec& spec, std::size_t in_channels);

std::string to_json(const StackSpec& spec);
StackSpec stack_spec_from_json(std::string_view json);

}  // namespace repgeo

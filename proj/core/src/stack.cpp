#include "repgeo/stack.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "repgeo/error.hpp"

namespace repgeo {

namespace {

// Box-Muller on mt19937_64 so seeded banks do not depend on the standard
// library's normal_distribution.
class SeededNormal {
 public:
  explicit SeededNormal(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  double uniform_open() {
    return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Even/odd Gabor filter at angle theta, zero mean, unit norm.
std::vector<double> gabor(std::size_t k, double theta, bool odd) {
  const double c = (static_cast<double>(k) - 1.0) / 2.0;
  const double sigma = std::max(0.8, static_cast<double>(k) / 4.0);
  const double freq = 0.25;  // cycles per pixel
  std::vector<double> w(k * k);
  double mean = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    for (std::size_t x = 0; x < k; ++x) {
      const double dy = static_cast<double>(y) - c;
      const double dx = static_cast<double>(x) - c;
      const double u = dx * std::cos(theta) + dy * std::sin(theta);
      const double env = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const double phase = 2.0 * std::numbers::pi * freq * u;
      w[y * k + x] = env * (odd ? std::sin(phase) : std::cos(phase));
      mean += w[y * k + x];
    }
  }
  mean /= static_cast<double>(k * k);
  double n2 = 0.0;
  for (auto& v : w) {
    v -= mean;
    n2 += v * v;
  }
  const double inv = n2 > 0.0 ? 1.0 / std::sqrt(n2) : 0.0;
  for (auto& v : w) v *= inv;
  return w;
}

std::string layer_label(std::size_t index, const Layer& layer) {
  return "layer " + std::to_string(index) + " (" + std::string(to_string(layer.kind())) + ")";
}

}  // namespace

Tensor make_filters(const ConvSpec& spec, std::size_t in_channels) {
  if (spec.out_channels == 0 || spec.kernel == 0) {
    throw ConfigError("conv2d: out_channels and kernel must be positive");
  }
  const std::size_t K = spec.kernel;
  Tensor filters({spec.out_channels, in_channels, K, K});
  const std::size_t per_out = in_channels * K * K;

  switch (spec.bank.source) {
    case FilterBank::Source::explicit_weights:
      if (spec.bank.weights.size() != filters.size()) {
        throw ConfigError("conv2d: expected " + std::to_string(filters.size()) +
                          " explicit weights for " + shape_to_string(filters.shape()) + ", got " +
                          std::to_string(spec.bank.weights.size()));
      }
      filters.storage() = spec.bank.weights;
      return filters;
    case FilterBank::Source::seeded:
    case FilterBank::Source::oriented:
      break;
  }

  std::size_t first_random = 0;
  if (spec.bank.source == FilterBank::Source::oriented) {
    const std::size_t n_oriented = std::min(2 * spec.bank.orientations, spec.out_channels);
    for (std::size_t f = 0; f < n_oriented; ++f) {
      const double theta = std::numbers::pi * static_cast<double>(f / 2) /
                           static_cast<double>(spec.bank.orientations);
      const auto w = gabor(K, theta, f % 2 == 1);
      const double share = 1.0 / std::sqrt(static_cast<double>(in_channels));
      for (std::size_t ci = 0; ci < in_channels; ++ci) {
        for (std::size_t i = 0; i < K * K; ++i) {
          filters[f * per_out + ci * K * K + i] = share * w[i];
        }
      }
    }
    first_random = n_oriented;
  }

  SeededNormal normal(spec.bank.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(per_out));
  for (std::size_t i = first_random * per_out; i < filters.size(); ++i) {
    filters[i] = scale * normal();
  }
  return filters;
}

// ---------------------------------------------------------------------------

LayerStack::LayerStack(std::string name, Shape input_shape, std::vector<Layer> layers)
    : name_(std::move(name)), input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.size() != 3) {
    throw ShapeError("representation input must be (channels, height, width), got " +
                     shape_to_string(input_shape_));
  }
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      shapes_.push_back(layers_[i].output_shape(shapes_.back()));
    } catch (const std::invalid_argument& e) {
      throw ShapeError(layer_label(i, layers_[i]) + " rejects input " +
                       shape_to_string(shapes_.back()) + ": " + e.what());
    }
  }
}

void LayerStack::require_input(const Tensor& x) const {
  if (x.shape() != input_shape_) {
    throw ShapeError("representation '" + name_ + "' expects input " +
                     shape_to_string(input_shape_) + ", got " + shape_to_string(x.shape()));
  }
}

std::vector<Tensor> LayerStack::activations(const Tensor& x) const {
  require_input(x);
  std::vector<Tensor> acts;
  acts.reserve(layers_.size() + 1);
  acts.push_back(x);
  for (const auto& layer : layers_) acts.push_back(layer.forward(acts.back()));
  return acts;
}

Tensor LayerStack::backward(const std::vector<Tensor>& acts, const Tensor& cotangent) const {
  if (cotangent.size() != dimension()) {
    throw ShapeError("pullback: cotangent has " + std::to_string(cotangent.size()) +
                     " entries, representation dimension is " + std::to_string(dimension()));
  }
  Tensor g = cotangent.reshaped(shapes_.back());
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i].vjp(acts[i], acts[i + 1], g);
  }
  return g;
}

Tensor LayerStack::evaluate(const Tensor& x) const {
  require_input(x);
  Tensor y = x;
  for (const auto& layer : layers_) y = layer.forward(y);
  return y.flattened();
}

Linearization LayerStack::linearize(const Tensor& x) const {
  auto acts = std::make_shared<std::vector<Tensor>>(activations(x));
  Tensor value = acts->back().flattened();
  return {std::move(value),
          [this, acts](const Tensor& cot) { return backward(*acts, cot); }};
}

Tensor LayerStack::pullback(const Tensor& x, const Tensor& cotangent) const {
  return backward(activations(x), cotangent);
}

LayerStack build_stack(const StackSpec& spec, const Shape& input_shape) {
  if (input_shape.size() != 3) {
    throw ShapeError("stack '" + spec.name + "': input must be (channels, height, width), got " +
                     shape_to_string(input_shape));
  }
  if (spec.layers.empty()) throw ConfigError("stack '" + spec.name + "' has no layers");
  const std::size_t tap = spec.tap.value_or(spec.layers.size() - 1);
  if (tap >= spec.layers.size()) {
    throw ConfigError("stack '" + spec.name + "': tap " + std::to_string(tap) +
                      " out of range for " + std::to_string(spec.layers.size()) + " layers");
  }

  std::vector<Layer> layers;
  Shape shape = input_shape;
  auto push = [&](Layer layer, const std::string& label) {
    try {
      shape = layer.output_shape(shape);
    } catch (const std::invalid_argument& e) {
      throw ShapeError("stack '" + spec.name + "': " + label + " rejects input " +
                       shape_to_string(shape) + ": " + e.what());
    }
    layers.push_back(std::move(layer));
  };

  if (spec.preprocess) {
    const auto& p = *spec.preprocess;
    push(Layer(AffinePreprocess{p.scale, p.channel_permutation, p.channel_means}), "preprocess");
  }

  for (std::size_t i = 0; i <= tap; ++i) {
    const std::string label = "layer " + std::to_string(i);
    std::visit(
        [&](const auto& ls) {
          using T = std::decay_t<decltype(ls)>;
          if constexpr (std::is_same_v<T, ConvSpec>) {
            push(Layer(Conv2d{make_filters(ls, shape[0]), ls.stride, ls.padding}),
                 label + " (conv2d)");
          } else if constexpr (std::is_same_v<T, HalfWaveSpec>) {
            push(Layer(HalfWave{}), label + " (halfwave)");
          } else if constexpr (std::is_same_v<T, MaxPoolSpec>) {
            push(Layer(MaxPool{ls.extent, ls.stride}), label + " (maxpool)");
          } else if constexpr (std::is_same_v<T, L2PoolSpec>) {
            push(Layer(L2Pool{hanning_kernel(ls.extent), ls.stride, ls.eps}),
                 label + " (l2pool)");
          } else if constexpr (std::is_same_v<T, FourierMagnitudeSpec>) {
            push(Layer(FourierMagnitude{}), label + " (fourier_magnitude)");
          } else {
            push(Layer(Identity{}), label + " (identity)");
          }
        },
        spec.layers[i]);
  }
  return LayerStack(spec.name, input_shape, std::move(layers));
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Channel widths of the three smallnet stages.
constexpr std::size_t kStageChannels[3] = {8, 16, 32};
constexpr std::size_t kFirstKernel = 5;

StackSpec smallnet(std::string name, std::size_t stages, const std::vector<LayerSpec>& pools) {
  StackSpec spec;
  spec.name = std::move(name);
  for (std::size_t s = 0; s < stages; ++s) {
    ConvSpec conv;
    conv.out_channels = kStageChannels[s];
    conv.kernel = s == 0 ? kFirstKernel : 3;
    conv.bank.seed = kSmallnetSeed + s;
    conv.bank.source = s == 0 ? FilterBank::Source::oriented : FilterBank::Source::seeded;
    spec.layers.emplace_back(conv);
    spec.layers.emplace_back(HalfWaveSpec{});
    spec.layers.push_back(pools[s]);
  }
  return spec;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "pixel",       "fourier_mag",          "smallnet_max",
      "smallnet_l2", "smallnet_l2_pool1_36", "smallnet_l2_pool2_18"};
  return names;
}

StackSpec preset(std::string_view name) {
  if (name == "pixel") return {"pixel", std::nullopt, {IdentitySpec{}}, std::nullopt};
  if (name == "fourier_mag") {
    return {"fourier_mag", std::nullopt, {FourierMagnitudeSpec{}}, std::nullopt};
  }
  const LayerSpec max2 = MaxPoolSpec{2, 2};
  const LayerSpec l2_6 = L2PoolSpec{6, 2, 1e-10};
  if (name == "smallnet_max") return smallnet("smallnet_max", 3, {max2, max2, max2});
  if (name == "smallnet_l2") return smallnet("smallnet_l2", 3, {l2_6, l2_6, l2_6});
  if (name == "smallnet_l2_pool1_36") {
    return smallnet("smallnet_l2_pool1_36", 1, {L2PoolSpec{36, 2, 1e-10}});
  }
  if (name == "smallnet_l2_pool2_18") {
    return smallnet("smallnet_l2_pool2_18", 2, {l2_6, L2PoolSpec{18, 2, 1e-10}});
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace repgeo

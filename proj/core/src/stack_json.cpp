// JSON form of StackSpec:
//
// {
//   "name": "smallnet_l2",
//   "preprocess": {"scale": 255, "channel_permutation": [2,1,0],
//                  "channel_means": [104,117,124]},          // or null
//   "layers": [
//     {"kind": "conv2d", "out_channels": 8, "kernel": 5, "stride": 1,
//      "padding": "same",
//      "filters": {"source": "oriented", "seed": 1, "orientations": 4}},
//     {"kind": "halfwave"},
//     {"kind": "maxpool", "extent": 2, "stride": 2},
//     {"kind": "l2pool", "extent": 6, "stride": 2, "eps": 1e-10,
//      "window": "hanning"},
//     {"kind": "fourier_magnitude"},
//     {"kind": "identity"}
//   ],
//   "tap": 8                                                   // optional
// }
//
// filters.source is one of "seeded", "oriented", "explicit"; explicit banks
// carry "weights" in (out, in, kh, kw) row-major order.

#include <json.hpp>

#include "repgeo/error.hpp"
#include "repgeo/stack.hpp"

namespace repgeo {

namespace {

using nlohmann::json;

std::string_view source_name(FilterBank::Source s) {
  switch (s) {
    case FilterBank::Source::seeded: return "seeded";
    case FilterBank::Source::oriented: return "oriented";
    case FilterBank::Source::explicit_weights: return "explicit";
  }
  return "seeded";
}

FilterBank::Source source_from(const std::string& s) {
  if (s == "seeded") return FilterBank::Source::seeded;
  if (s == "oriented") return FilterBank::Source::oriented;
  if (s == "explicit") return FilterBank::Source::explicit_weights;
  throw ConfigError("unknown filter source '" + s + "'");
}

json layer_to_json(const LayerSpec& layer) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConvSpec>) {
          json filters{{"source", source_name(l.bank.source)}};
          if (l.bank.source == FilterBank::Source::explicit_weights) {
            filters["weights"] = l.bank.weights;
          } else {
            filters["seed"] = l.bank.seed;
          }
          if (l.bank.source == FilterBank::Source::oriented) {
            filters["orientations"] = l.bank.orientations;
          }
          return {{"kind", "conv2d"},       {"out_channels", l.out_channels},
                  {"kernel", l.kernel},     {"stride", l.stride},
                  {"padding", to_string(l.padding)}, {"filters", filters}};
        } else if constexpr (std::is_same_v<T, HalfWaveSpec>) {
          return {{"kind", "halfwave"}};
        } else if constexpr (std::is_same_v<T, MaxPoolSpec>) {
          return {{"kind", "maxpool"}, {"extent", l.extent}, {"stride", l.stride}};
        } else if constexpr (std::is_same_v<T, L2PoolSpec>) {
          return {{"kind", "l2pool"}, {"extent", l.extent}, {"stride", l.stride},
                  {"eps", l.eps},     {"window", "hanning"}};
        } else if constexpr (std::is_same_v<T, FourierMagnitudeSpec>) {
          return {{"kind", "fourier_magnitude"}};
        } else {
          return {{"kind", "identity"}};
        }
      },
      layer);
}

LayerSpec layer_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "conv2d") {
    ConvSpec c;
    c.out_channels = j.at("out_channels").get<std::size_t>();
    c.kernel = j.value("kernel", std::size_t{3});
    c.stride = j.value("stride", std::size_t{1});
    c.padding = padding_from_string(j.value("padding", std::string("same")));
    if (j.contains("filters")) {
      const auto& f = j.at("filters");
      c.bank.source = source_from(f.value("source", std::string("seeded")));
      c.bank.seed = f.value("seed", std::uint64_t{0});
      c.bank.orientations = f.value("orientations", std::size_t{4});
      if (c.bank.source == FilterBank::Source::explicit_weights) {
        c.bank.weights = f.at("weights").get<std::vector<double>>();
      }
    }
    return c;
  }
  if (kind == "halfwave") return HalfWaveSpec{};
  if (kind == "maxpool") {
    return MaxPoolSpec{j.value("extent", std::size_t{2}), j.value("stride", std::size_t{2})};
  }
  if (kind == "l2pool") {
    const std::string window = j.value("window", std::string("hanning"));
    if (window != "hanning") throw ConfigError("l2pool: unsupported window '" + window + "'");
    return L2PoolSpec{j.value("extent", std::size_t{6}), j.value("stride", std::size_t{2}),
                      j.value("eps", 1e-10)};
  }
  if (kind == "fourier_magnitude") return FourierMagnitudeSpec{};
  if (kind == "identity") return IdentitySpec{};
  throw ConfigError("unknown layer kind '" + kind + "'");
}

}  // namespace

std::string to_json(const StackSpec& spec) {
  json j;
  j["name"] = spec.name;
  if (spec.preprocess) {
    j["preprocess"] = {{"scale", spec.preprocess->scale},
                       {"channel_permutation", spec.preprocess->channel_permutation},
                       {"channel_means", spec.preprocess->channel_means}};
  } else {
    j["preprocess"] = nullptr;
  }
  j["layers"] = json::array();
  for (const auto& l : spec.layers) j["layers"].push_back(layer_to_json(l));
  if (spec.tap) j["tap"] = *spec.tap;
  return j.dump(2);
}

StackSpec stack_spec_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    StackSpec spec;
    spec.name = j.value("name", std::string("custom"));
    if (j.contains("preprocess") && !j.at("preprocess").is_null()) {
      const auto& p = j.at("preprocess");
      PreprocessSpec pre;
      pre.scale = p.value("scale", 255.0);
      pre.channel_permutation = p.at("channel_permutation").get<std::vector<std::size_t>>();
      pre.channel_means = p.at("channel_means").get<std::vector<double>>();
      spec.preprocess = std::move(pre);
    }
    for (const auto& l : j.at("layers")) spec.layers.push_back(layer_from_json(l));
    if (j.contains("tap") && !j.at("tap").is_null()) spec.tap = j.at("tap").get<std::size_t>();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid stack spec JSON: ") + e.what());
  }
}

}  // namespace repgeo

#include <benchmark/benchmark.h>

#include <random>

#include "repgeo/layers.hpp"
#include "repgeo/stack.hpp"

using namespace repgeo;

namespace {

Tensor noise(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto hw = static_cast<std::size_t>(state.range(1));
  const Tensor x = noise({c, hw, hw}, 1);
  const Tensor w = noise({2 * c, c, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, w, 1, Padding::same));
}
BENCHMARK(BM_Conv3x3)->Args({8, 32})->Args({16, 16});

void BM_L2Pool(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Tensor x = noise({8, 64, 64}, 3);
  const Layer layer(L2Pool{hanning_kernel(k), 2, 1e-10});
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x));
}
BENCHMARK(BM_L2Pool)->Arg(6)->Arg(18)->Arg(36);

void BM_MaxPool(benchmark::State& state) {
  const Tensor x = noise({8, 64, 64}, 4);
  const Layer layer(MaxPool{2, 2});
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x));
}
BENCHMARK(BM_MaxPool);

void BM_FourierMagnitude(benchmark::State& state) {
  const Tensor x = noise({1, 64, 64}, 5);
  const Layer layer(FourierMagnitude{});
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x));
}
BENCHMARK(BM_FourierMagnitude);

void BM_PresetPullback(benchmark::State& state, const char* name) {
  const auto rep = build_stack(preset(name), {1, 64, 64});
  const Tensor x = noise({1, 64, 64}, 6);
  const Tensor c = noise({rep.dimension()}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(rep.pullback(x, c));
}
BENCHMARK_CAPTURE(BM_PresetPullback, smallnet_l2, "smallnet_l2");
BENCHMARK_CAPTURE(BM_PresetPullback, smallnet_max, "smallnet_max");
BENCHMARK_CAPTURE(BM_PresetPullback, pool1_36, "smallnet_l2_pool1_36");

}  // namespace

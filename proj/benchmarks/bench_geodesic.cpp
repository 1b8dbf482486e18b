#include <benchmark/benchmark.h>

#include <random>

#include "repgeo/geodesic.hpp"
#include "repgeo/stack.hpp"

using namespace repgeo;

namespace {

Path random_path(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Path p;
  for (int n = 0; n <= 10; ++n) {
    Tensor t({1, 64, 64});
    for (auto& v : t.storage()) v = u(rng);
    p.frames.push_back(std::move(t));
  }
  return p;
}

// One Adam iteration costs about one of these.
void BM_GradRepEnergy(benchmark::State& state, const char* name) {
  const auto rep = build_stack(preset(name), {1, 64, 64});
  const Path p = random_path(1);
  for (auto _ : state) benchmark::DoNotOptimize(grad_rep_energy(p, rep));
}
BENCHMARK_CAPTURE(BM_GradRepEnergy, smallnet_l2, "smallnet_l2")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GradRepEnergy, smallnet_max, "smallnet_max")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GradRepEnergy, fourier_mag, "fourier_mag")->Unit(benchmark::kMillisecond);

void BM_ProjectOut(benchmark::State& state) {
  const Path a = random_path(2), b = random_path(3);
  for (auto _ : state) benchmark::DoNotOptimize(project_out(a.frames, b.frames, 1e-12));
}
BENCHMARK(BM_ProjectOut);

}  // namespace

#include "checks.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "repgeo/geodesic.hpp"
#include "repgeo/gradient_check.hpp"
#include "repgeo/image_io.hpp"
#include "repgeo/layers.hpp"
#include "repgeo/stack.hpp"
#include "run_dir.hpp"

namespace repgeo::app {

namespace {

using nlohmann::json;

Tensor uniform(Shape shape, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = u(rng);
  return t;
}

// Magnitudes in [gap, 1] with random signs keep rectifiers and max-pool
// windows away from their kinks.
Tensor signed_away_from_zero(Shape shape, std::uint64_t seed, double gap = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(gap, 1.0);
  std::bernoulli_distribution coin(0.5);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = coin(rng) ? u(rng) : -u(rng);
  return t;
}

Path random_path(std::size_t steps, const Shape& shape, std::uint64_t seed) {
  Path p;
  for (std::size_t n = 0; n <= steps; ++n) p.frames.push_back(uniform(shape, seed * 97 + n, 0.05, 0.95));
  return p;
}

Tensor pack(const Path& p) {
  const std::size_t m = p.frames.front().size();
  Tensor t({(p.frames.size() - 2) * m});
  for (std::size_t n = 1; n + 1 < p.frames.size(); ++n)
    std::copy(p.frames[n].values().begin(), p.frames[n].values().end(), t.data() + (n - 1) * m);
  return t;
}

Path unpack(const Tensor& t, Path p) {
  const std::size_t m = p.frames.front().size();
  for (std::size_t n = 1; n + 1 < p.frames.size(); ++n)
    std::copy(t.data() + (n - 1) * m, t.data() + n * m, p.frames[n].data());
  return p;
}

GradientCheckReport check_functional(const Path& p, const std::function<double(const Path&)>& f,
                                     const std::function<PathField(const Path&)>& grad,
                                     double tolerance, std::uint64_t seed) {
  return gradient_check(
      [&](const Tensor& t) { return Tensor({1}, std::vector<double>{f(unpack(t, p))}); },
      [&](const Tensor& t, const Tensor& c) {
        Path q = unpack(t, p);
        q.frames = grad(q);
        Tensor g = pack(q);
        g *= c[0];
        return g;
      },
      pack(p), tolerance, {.seed = seed});
}

struct Tally {
  std::string name;
  std::size_t instances = 0;
  double worst = 0.0;
  std::size_t refined = 0;
  bool passed = true;

  void add(const GradientCheckReport& r, double tolerance) {
    ++instances;
    worst = std::max(worst, r.max_relative_error);
    refined += r.refined_coordinates;
    passed = passed && r.passed && r.max_relative_error <= tolerance;
  }
  json to_json() const {
    return {{"name", name}, {"instances", instances}, {"max_relative_error", worst},
            {"refined_coordinates", refined}, {"passed", passed}};
  }
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file) {
  std::istringstream is(read_text(file));
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

json gradient_sweep(std::size_t instances, double tolerance) {
  std::vector<Tally> tallies;
  auto tally = [&](const std::string& name) -> Tally& {
    for (auto& t : tallies)
      if (t.name == name) return t;
    tallies.push_back({name});
    return tallies.back();
  };

  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    const Tensor x = signed_away_from_zero({2, 8, 8}, seed);
    const Layer layers[] = {
        Layer(Conv2d{uniform({3, 2, 3, 3}, 1000 + seed, -1, 1), 1 + seed % 2,
                     seed % 3 == 0 ? Padding::valid : Padding::same}),
        Layer(HalfWave{}),
        Layer(MaxPool{2, 2}),
        Layer(L2Pool{hanning_kernel(6), 2, 1e-10}),
        Layer(FourierMagnitude{}),
        Layer(Identity{}),
    };
    for (const auto& layer : layers)
      tally("layer/" + std::string(to_string(layer.kind())))
          .add(gradient_check(layer, x, tolerance, {.seed = seed}), tolerance);
    const Layer pre(AffinePreprocess{255.0, {2, 1, 0}, {104, 117, 124}});
    tally("layer/" + std::string(to_string(pre.kind())))
        .add(gradient_check(pre, uniform({3, 5, 5}, seed, 0, 1), tolerance, {.seed = seed}), tolerance);
  }

  for (const auto& name : preset_names()) {
    const auto rep = build_stack(preset(name), {1, 32, 32});
    for (std::uint64_t seed = 0; seed < instances; ++seed) {
      const Tensor x = uniform({1, 32, 32}, seed, 0.05, 0.95);
      const auto r = gradient_check([&](const Tensor& t) { return rep.evaluate(t); },
                                    [&](const Tensor& t, const Tensor& c) { return rep.pullback(t, c); },
                                    x, tolerance, {.max_coordinates = 64, .seed = seed});
      tally("pullback/" + name).add(r, tolerance);
    }
  }

  const LayerStack reps[] = {build_stack(preset("smallnet_l2"), {1, 12, 12}),
                             build_stack(preset("smallnet_max"), {1, 12, 12}),
                             build_stack(preset("fourier_mag"), {1, 12, 12})};
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    const Path p = random_path(4, {1, 12, 12}, seed);
    tally("grad_pixel_energy")
        .add(check_functional(p, pixel_energy, grad_pixel_energy, tolerance, seed), tolerance);
    for (const auto& rep : reps) {
      tally("grad_rep_energy/" + rep.name())
          .add(check_functional(
                   p, [&](const Path& q) { return rep_energy(q, rep); },
                   [&](const Path& q) { return grad_rep_energy(q, rep); }, tolerance, seed),
               tolerance);
    }
  }

  json ops = json::array();
  bool passed = true;
  for (const auto& t : tallies) {
    ops.push_back(t.to_json());
    passed = passed && t.passed;
  }
  return {{"tolerance", tolerance}, {"operators", ops}, {"passed", passed}};
}

json audit_run(const std::filesystem::path& run, double cv_max) {
  const json manifest = json::parse(read_text(run / kManifestName));
  const json& cfg = manifest.at("config");
  const double steps = cfg.at("n").get<double>();
  const double rep_tol = cfg.at("rep-tol").get<double>();

  const auto rows = read_csv(run / "diagnostics.csv");
  if (rows.size() < 2) throw IoError("diagnostics.csv in " + run.string() + " has no records");
  struct Row {
    double rep_energy, pixel_energy, rep_length, cv;
  };
  std::vector<Row> log;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& c = rows[i];
    if (c.size() != 5) throw IoError("malformed diagnostics row " + std::to_string(i));
    log.push_back({std::stod(c[1]), std::stod(c[2]), std::stod(c[3]), std::stod(c[4])});
  }

  // Equality holds for equispaced paths, so allow for rounding in the
  // 17-digit CSV round trip.
  std::size_t cs_violations = 0;
  double cs_worst = 0.0;
  for (const auto& r : log) {
    const double ratio = r.rep_energy > 0.0 ? r.rep_length * r.rep_length / (steps * r.rep_energy) : 0.0;
    cs_worst = std::max(cs_worst, ratio);
    if (r.rep_length * r.rep_length > steps * r.rep_energy * (1.0 + 1e-12)) ++cs_violations;
  }

  const double pixel_scale = log.front().pixel_energy;
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < log.size(); ++k)
    worst_rise = std::max(worst_rise, log[k].pixel_energy - log[k - 1].pixel_energy);
  const bool monotone = worst_rise <= rep_tol * pixel_scale;
  // A path that collapsed to (numerically) one point in representation space
  // has no meaningful spacing; its distances are rounding noise. The same
  // floor applies when comparing the final energy with the first minimum.
  double initial = 0.0;
  if (manifest.contains("result")) initial = manifest["result"].value("initial_rep_energy", 0.0);
  const double rep_zero = cfg.value("rep-floor", 0.0) * initial;
  const bool collapsed = initial > 0.0 && log.front().rep_energy < kCollapsedFraction * initial;
  const double rep_ratio = log.front().rep_energy > 0.0 ? log.back().rep_energy / log.front().rep_energy : 1.0;
  const bool rep_kept = log.back().rep_energy <= (1.0 + rep_tol) * std::max(log.front().rep_energy, rep_zero);
  const bool cv_ok = collapsed || log.front().cv <= cv_max;

  return {{"run", run.string()},
          {"records", log.size()},
          {"cauchy_schwarz", {{"violations", cs_violations}, {"max_ratio", cs_worst}, {"passed", cs_violations == 0}}},
          {"equispacing",
           {{"cv", log.front().cv}, {"bound", cv_max}, {"collapsed", collapsed}, {"passed", cv_ok}}},
          {"pixel_energy",
           {{"max_rise", worst_rise}, {"allowed", rep_tol * pixel_scale}, {"passed", monotone}}},
          {"rep_energy", {{"final_over_first", rep_ratio}, {"allowed", 1.0 + rep_tol}, {"passed", rep_kept}}},
          {"passed", cs_violations == 0 && cv_ok && monotone && rep_kept}};
}

}  // namespace repgeo::app

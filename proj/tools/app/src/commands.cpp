#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "checks.hpp"
#include "config.hpp"
#include "repgeo/error.hpp"
#include "repgeo/geodesic.hpp"
#include "repgeo/image_io.hpp"
#include "repgeo/metrics.hpp"
#include "repgeo/stack.hpp"
#include "repgeo/tensor_io.hpp"
#include "repgeo/transforms.hpp"
#include "repgeo_app/cli.hpp"
#include "run_dir.hpp"

namespace repgeo::app {

namespace {

const std::string& required(const FilePath& p, const char* flag) {
  if (p.value.empty()) throw std::invalid_argument(std::string("--") + flag + " is required");
  return p.value;
}

// Inputs are copied into the run so that its manifest can be replayed
// without the original files.
std::string keep_input(RunRecorder& rec, const std::string& stem, const Tensor& t) {
  fs::create_directories(rec.dir() / "inputs");
  const std::string rel = "inputs/" + stem + ".tensor";
  write_tensor(rec.dir() / rel, t);
  rec.add(rel);
  return rel;
}

std::string keep_frames(RunRecorder& rec, const std::string& stem, const Path& path) {
  const std::string rel = "inputs/" + stem;
  fs::create_directories(rec.dir() / rel);
  for (const auto& f : write_frames(rec.dir() / rel, path)) rec.add(rel + "/" + f);
  return rel;
}

// A preset name, or a stack JSON file.
StackSpec resolve_stack(const std::string& ref) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return preset(ref);
  if (!fs::exists(ref)) throw ConfigError("unknown preset or missing stack file: " + ref);
  return stack_spec_from_json(read_text(ref));
}

bool is_preset(const std::string& ref) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), ref) != names.end();
}

std::string keep_stack(RunRecorder& rec, const std::string& ref, const StackSpec& spec) {
  write_text(rec.dir() / "stack.json", to_json(spec) + "\n");
  rec.add("stack.json");
  return is_preset(ref) ? ref : "stack.json";
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

int cmd_transform(TransformOptions opts, const fs::path& dir, Context& ctx) {
  const Tensor x = load_image(required(opts.input, "input"));

  TransformSpec spec;
  spec.kind = transform_kind_from_string(opts.kind);
  spec.dx = opts.dx;
  spec.dy = opts.dy;
  spec.degrees = opts.deg;
  spec.scale = opts.scale;
  if (std::isnan(opts.center_x) != std::isnan(opts.center_y))
    throw std::invalid_argument("--center-x and --center-y must be given together");
  if (!std::isnan(opts.center_x)) spec.center = Point2{opts.center_x, opts.center_y};
  spec.boundary = opts.boundary.empty()
                      ? (spec.kind == TransformKind::translate ? Boundary::circular : Boundary::zero)
                      : boundary_from_string(opts.boundary);
  spec.interpolation = interpolation_from_string(opts.interp);
  spec.validate();
  if (opts.n < 1) throw std::invalid_argument("--n must be at least 1");

  const Path path = ground_truth_path(spec, x, opts.n);

  RunRecorder rec(dir, "transform");
  opts.input.value = keep_input(rec, "input", x);
  rec.add(write_frames(dir, path));
  rec.set_config(snapshot(opts));
  rec.set("transform", {{"kind", to_string(spec.kind)},
                        {"boundary", to_string(spec.boundary)},
                        {"interpolation", to_string(spec.interpolation)}});
  rec.finish();
  ctx.out << "wrote " << path.frames.size() << " frames to " << dir.string() << "\n";
  return kOk;
}

int cmd_synth(SynthOptions opts, const fs::path& dir, Context& ctx) {
  const Tensor x0 = load_image(required(opts.x0, "x0"));
  const Tensor xn = load_image(required(opts.xn, "xn"));
  if (x0.shape() != xn.shape())
    throw ShapeError("endpoint shapes differ: " + shape_to_string(x0.shape()) + " vs " + shape_to_string(xn.shape()));
  const StackSpec spec = resolve_stack(opts.stack.value);
  const LayerStack rep = build_stack(spec, x0.shape());

  GeodesicConfig cfg;
  cfg.steps = opts.n;
  cfg.adam = {opts.lr, opts.beta1, opts.beta2, opts.adam_eps};
  cfg.inner_iters = opts.inner_iters;
  cfg.reproject_iters = opts.reproject_iters;
  cfg.projection_step = opts.lambda;
  cfg.outer_tol = opts.outer_tol;
  cfg.outer_window = opts.outer_window;
  cfg.outer_max = opts.outer_max;
  cfg.rep_tol = opts.rep_tol;
  cfg.rep_floor = opts.rep_floor;
  cfg.projection_eps = opts.projection_eps;
  cfg.max_backtracks = opts.max_backtracks;
  cfg.validate();

  Path reference;
  if (!opts.reference.value.empty()) {
    reference = read_frames(opts.reference.value);
    if (reference.frames.size() != opts.n + 1 || reference.front().shape() != x0.shape())
      throw ShapeError("reference frames do not match the synthesized path's shape");
  }

  RunRecorder rec(dir, "synth");
  opts.x0.value = keep_input(rec, "x0", x0);
  opts.xn.value = keep_input(rec, "xn", xn);
  opts.stack.value = keep_stack(rec, opts.stack.value, spec);
  if (!reference.frames.empty()) opts.reference.value = keep_frames(rec, "reference", reference);
  rec.set_config(snapshot(opts));

  SynthResult result;
  try {
    result = synth_geodesic(x0, xn, rep, cfg);
  } catch (const GeodesicError& e) {
    result.path = e.path();
    result.diagnostics = e.diagnostics();
    if (result.diagnostics.message.empty()) result.diagnostics.message = e.what();
  }
  const Diagnostics& d = result.diagnostics;

  rec.add(write_frames(dir, result.path));
  write_text(dir / "diagnostics.csv", diagnostics_csv(d));
  rec.add("diagnostics.csv");
  json summary = {{"status", to_string(d.status)},
                  {"message", d.message},
                  {"outer_iterations", d.log.empty() ? 0 : d.log.size() - 1},
                  {"rejected_steps", d.rejected_steps},
                  {"initial_rep_energy", d.initial_rep_energy},
                  {"initial_pixel_energy", d.initial_pixel_energy}};
  if (!d.log.empty()) {
    summary["final_rep_energy"] = d.log.back().rep_energy;
    summary["final_pixel_energy"] = d.log.back().pixel_energy;
  }
  if (!reference.frames.empty()) {
    const auto rmse = path_rmse(result.path, reference);
    write_text(dir / "rmse.csv", rmse_csv(rmse));
    rec.add("rmse.csv");
    summary["mean_rmse"] = mean(rmse);
  }
  rec.set("result", summary);
  rec.finish();

  ctx.out << "status " << to_string(d.status);
  if (!d.log.empty())
    ctx.out << ", E[f] " << fmt(d.log.back().rep_energy) << " (linear " << fmt(d.initial_rep_energy) << ")"
            << ", E[x] " << fmt(d.log.back().pixel_energy);
  if (summary.contains("mean_rmse")) ctx.out << ", mean rmse " << fmt(summary["mean_rmse"].get<double>());
  ctx.out << "\nwrote " << dir.string() << "\n";
  if (!d.message.empty() && d.status != SynthStatus::converged) ctx.err << d.message << "\n";
  return d.status == SynthStatus::converged ? kOk : kNotConverged;
}

int cmd_slice(SliceOptions opts, const fs::path& dir, Context& ctx) {
  const Path path = read_frames(required(opts.run, "run"));
  const Tensor slice = temporal_slice(path, slice_axis_from_string(opts.axis), opts.index);

  RunRecorder rec(dir, "slice");
  opts.run.value = keep_frames(rec, "frames", path);
  rec.add(write_image_pair(dir, "slice", slice, false));
  rec.set_config(snapshot(opts));
  rec.finish();
  ctx.out << "wrote " << (dir / "slice.png").string() << "\n";
  return kOk;
}

int cmd_rf(RfOptions opts, const fs::path& dir, Context& ctx) {
  const StackSpec spec = resolve_stack(opts.stack.value);
  const LayerStack rep = build_stack(spec, {opts.channels, opts.size, opts.size});
  const Shape& fs_shape = rep.feature_shape();
  if (fs_shape.size() != 3) throw ConfigError("stack " + spec.name + " has no spatial feature map");
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  if (opts.y == unset) opts.y = fs_shape[1] / 2;
  if (opts.x == unset) opts.x = fs_shape[2] / 2;

  const RFMap map = receptive_field(rep, {opts.y, opts.x}, opts.n_noise, opts.seed);

  RunRecorder rec(dir, "rf");
  opts.stack.value = keep_stack(rec, opts.stack.value, spec);
  rec.add(write_image_pair(dir, "rf", map.grid, true));
  std::ostringstream csv;
  csv.precision(17);
  csv << "y,x,size_estimate\n" << opts.y << ',' << opts.x << ',' << map.size_estimate << '\n';
  write_text(dir / "rf_size.csv", csv.str());
  rec.add("rf_size.csv");
  rec.set_config(snapshot(opts));
  rec.set("result", {{"size_estimate", map.size_estimate}});
  rec.finish();
  ctx.out << "receptive field size " << fmt(map.size_estimate) << " px\nwrote " << dir.string() << "\n";
  return kOk;
}

int cmd_deviation(DeviationOptions opts, const fs::path& dir, Context& ctx) {
  const Path path = read_frames(required(opts.run, "run"));
  const StackSpec spec = resolve_stack(opts.stack.value);
  const LayerStack rep = build_stack(spec, path.front().shape());
  const DeviationProfile profile = deviation_profile(path, rep);

  RunRecorder rec(dir, "deviation");
  opts.run.value = keep_frames(rec, "frames", path);
  opts.stack.value = keep_stack(rec, opts.stack.value, spec);
  write_text(dir / "deviation.csv", profile_csv(profile));
  rec.add("deviation.csv");
  rec.set_config(snapshot(opts));
  rec.set("result", {{"max_deviation", profile.max_deviation()}});
  rec.finish();
  ctx.out << "max normalized deviation " << fmt(profile.max_deviation()) << "\nwrote " << dir.string() << "\n";
  return kOk;
}

int cmd_compare(CompareOptions opts, const fs::path& dir, Context& ctx) {
  const Path path = read_frames(required(opts.run, "run"));
  const Path reference = read_frames(required(opts.reference, "reference"));
  const auto rmse = path_rmse(path, reference);

  RunRecorder rec(dir, "compare");
  opts.run.value = keep_frames(rec, "frames", path);
  opts.reference.value = keep_frames(rec, "reference", reference);
  write_text(dir / "rmse.csv", rmse_csv(rmse));
  rec.add("rmse.csv");
  rec.set_config(snapshot(opts));
  rec.set("result", {{"mean_rmse", mean(rmse)}});
  rec.finish();
  ctx.out << "mean rmse " << fmt(mean(rmse)) << "\nwrote " << dir.string() << "\n";
  return kOk;
}

int cmd_check(CheckOptions opts, const fs::path& dir, Context& ctx) {
  if (!opts.gradients && opts.runs.empty()) opts.gradients = true;
  if (opts.instances < 1) throw std::invalid_argument("--instances must be at least 1");

  json report = json::object();
  bool passed = true;
  if (opts.gradients) {
    report["gradients"] = gradient_sweep(opts.instances);
    passed = passed && report["gradients"]["passed"].get<bool>();
  }
  if (!opts.runs.empty()) {
    json audits = json::array();
    for (const auto& run : opts.runs) {
      audits.push_back(audit_run(run, opts.cv_max));
      passed = passed && audits.back()["passed"].get<bool>();
    }
    report["runs"] = audits;
  }
  report["passed"] = passed;

  RunRecorder rec(dir, "check");
  write_text(dir / "report.json", report.dump(2) + "\n");
  rec.add("report.json");
  rec.set_config(snapshot(opts));
  rec.finish();
  ctx.out << report.dump(2) << "\n";
  return passed ? kOk : kCheckFailed;
}

}  // namespace repgeo::app

#pragma once

// Every command's settings live in one struct whose fields() enumerates
// (flag name, member, help). The same list drives CLI11 registration, JSON
// config loading and the config snapshot written to manifests, so a config
// file is literally a map from long flag names to values.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace repgeo::app {

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Marks fields holding file paths; relative paths in a config file are
/// resolved against the file's directory.
struct FilePath {
  std::string value;
};

struct TransformOptions {
  FilePath input;
  std::string kind = "translate";
  double dx = 0.0;
  double dy = 0.0;
  double deg = 0.0;
  double scale = 1.0;
  double center_x = kUnset;
  double center_y = kUnset;
  std::string boundary;  // empty: circular for translate, zero otherwise
  std::string interp = "bicubic";
  std::size_t n = 10;

  template <class F>
  void fields(F&& f) {
    f("input", input, "source image (.png or .tensor)");
    f("kind", kind, "translate | rotate | dilate");
    f("dx", dx, "horizontal shift in pixels at fraction 1");
    f("dy", dy, "vertical shift in pixels at fraction 1");
    f("deg", deg, "rotation in degrees, counter-clockwise");
    f("scale", scale, "dilation factor");
    f("center-x", center_x, "rotation/dilation center column (default: image center)");
    f("center-y", center_y, "rotation/dilation center row (default: image center)");
    f("boundary", boundary, "circular | zero | reflect");
    f("interp", interp, "bicubic | bilinear");
    f("n", n, "number of steps N; N + 1 frames are written");
  }
};

struct SynthOptions {
  FilePath x0;
  FilePath xn;
  FilePath stack{"smallnet_l2"};
  std::size_t n = 10;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t inner_iters = 10000;
  std::size_t reproject_iters = 1000;
  double lambda = 0.1;
  double outer_tol = 1e-4;
  std::size_t outer_window = 5;
  std::size_t outer_max = 200;
  double rep_tol = 0.01;
  double rep_floor = 1e-6;
  double projection_eps = 1e-12;
  std::size_t max_backtracks = 4;
  FilePath reference;

  template <class F>
  void fields(F&& f) {
    f("x0", x0, "first endpoint image");
    f("xn", xn, "last endpoint image");
    f("stack", stack, "preset name or stack JSON file");
    f("n", n, "number of steps N");
    f("lr", lr, "Adam step size");
    f("beta1", beta1, "Adam beta1");
    f("beta2", beta2, "Adam beta2");
    f("adam-eps", adam_eps, "Adam epsilon");
    f("inner-iters", inner_iters, "Adam iterations of the first minimization");
    f("reproject-iters", reproject_iters, "Adam iterations after each pixel step");
    f("lambda", lambda, "pixel-domain step size");
    f("outer-tol", outer_tol, "relative pixel-energy decrease counted as stalled");
    f("outer-window", outer_window, "consecutive stalled outer iterations to stop");
    f("outer-max", outer_max, "maximum outer iterations");
    f("rep-tol", rep_tol, "relative representational-energy slack");
    f("rep-floor", rep_floor, "fraction of the linear path's E[f] treated as zero");
    f("projection-eps", projection_eps, "RMS norm below which projection is skipped");
    f("max-backtracks", max_backtracks, "step halvings before a pixel step is abandoned");
    f("reference", reference, "optional run directory with reference frames (writes rmse.csv)");
  }
};

struct SliceOptions {
  FilePath run;
  std::string axis = "row";
  std::size_t index = 0;

  template <class F>
  void fields(F&& f) {
    f("run", run, "run directory holding frame_*.tensor");
    f("axis", axis, "row | column");
    f("index", index, "row or column index");
  }
};

struct RfOptions {
  FilePath stack{"smallnet_l2"};
  std::size_t size = 64;
  std::size_t channels = 1;
  std::size_t y = std::numeric_limits<std::size_t>::max();
  std::size_t x = std::numeric_limits<std::size_t>::max();
  std::size_t n_noise = 256;
  std::uint64_t seed = 0;

  template <class F>
  void fields(F&& f) {
    f("stack", stack, "preset name or stack JSON file");
    f("size", size, "input height and width");
    f("channels", channels, "input channels");
    f("y", y, "feature row (default: center)");
    f("x", x, "feature column (default: center)");
    f("n-noise", n_noise, "white-noise draws");
    f("seed", seed, "noise seed");
  }
};

struct DeviationOptions {
  FilePath run;
  FilePath stack{"smallnet_l2"};

  template <class F>
  void fields(F&& f) {
    f("run", run, "run directory holding frame_*.tensor");
    f("stack", stack, "preset name or stack JSON file");
  }
};

struct CompareOptions {
  FilePath run;
  FilePath reference;

  template <class F>
  void fields(F&& f) {
    f("run", run, "run directory holding frame_*.tensor");
    f("reference", reference, "run directory with the reference frames");
  }
};

struct CheckOptions {
  bool gradients = false;
  std::size_t instances = 20;
  std::vector<std::string> runs;
  double cv_max = 0.05;

  template <class F>
  void fields(F&& f) {
    f("gradients", gradients, "finite-difference sweep over layers, presets and energies");
    f("instances", instances, "seeded instances per operator");
    f("runs", runs, "run directories whose diagnostics are audited");
    f("cv-max", cv_max, "equispacing CV bound after the first minimization");
  }
};

}  // namespace repgeo::app

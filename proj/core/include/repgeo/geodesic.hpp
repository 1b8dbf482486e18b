#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "repgeo/path.hpp"
#include "repgeo/stack.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo {

struct AdamSettings {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct GeodesicConfig {
  /// Number of steps N; the path has N + 1 frames.
  std::size_t steps = 10;
  AdamSettings adam;
  /// Adam iterations of the first minimization of the representational energy.
  std::size_t inner_iters = 10000;
  /// Adam iterations of every re-minimization after a pixel-domain step.
  std::size_t reproject_iters = 1000;
  /// Pixel-domain step size applied to the projected pixel-energy gradient.
  double projection_step = 0.1;
  /// Stop once E[path] decreases by less than this fraction for
  /// `outer_window` consecutive outer iterations.
  double outer_tol = 1e-4;
  std::size_t outer_window = 5;
  std::size_t outer_max = 200;
  /// Relative slack allowed when restoring the representational energy and
  /// for pixel-energy increases between outer iterations.
  double rep_tol = 0.01;
  /// Energies below rep_floor times the linear path's representational
  /// energy count as zero when checking that re-minimization restored it.
  double rep_floor = 1e-6;
  /// Below this RMS norm the representational gradient is treated as zero
  /// and the pixel step is not projected.
  double projection_eps = 1e-12;
  /// Halvings of the pixel step tried before a rejected outer step ends the loop.
  std::size_t max_backtracks = 4;

  /// Throws ConfigError for N < 2, nonpositive rates or tolerances.
  void validate() const;
};

enum class SynthStatus {
  converged,
  max_outer_reached,
  diverged,
  reprojection_failed,
};

std::string_view to_string(SynthStatus status);

struct DiagnosticsRecord {
  std::size_t iter = 0;
  double rep_energy = 0.0;
  double pixel_energy = 0.0;
  double rep_length = 0.0;
  double equispacing_cv = 0.0;
};

/// Row 0 describes the path after the first minimization; row k the path
/// after outer iteration k was accepted.
struct Diagnostics {
  std::vector<DiagnosticsRecord> log;
  SynthStatus status = SynthStatus::converged;
  std::string message;
  /// Energies of the initial linear path.
  double initial_rep_energy = 0.0;
  double initial_pixel_energy = 0.0;
  std::size_t rejected_steps = 0;
};

/// CSV with header iter,rep_energy,pixel_energy,rep_length,equispacing_cv.
std::string diagnostics_csv(const Diagnostics& diagnostics);

/// Raised when the optimization diverges or the representational energy
/// cannot be restored; carries the last valid path and the diagnostics.
class GeodesicError : public std::runtime_error {
 public:
  GeodesicError(const std::string& what, Path path, Diagnostics diagnostics)
      : std::runtime_error(what), path_(std::move(path)), diagnostics_(std::move(diagnostics)) {}

  const Path& path() const { return path_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }

 private:
  Path path_;
  Diagnostics diagnostics_;
};

/// Responses f(x_n) of every frame.
std::vector<Tensor> responses(const Path& path, const Representation& rep);

/// Sum of ||f(x_n) - f(x_{n-1})||.
double rep_length(const Path& path, const Representation& rep);
/// Sum of ||f(x_n) - f(x_{n-1})||^2.
double rep_energy(const Path& path, const Representation& rep);
/// Sum of ||x_n - x_{n-1}||^2.
double pixel_energy(const Path& path);
/// std / mean of the consecutive representation distances (0 if all vanish).
double equispacing_cv(const Path& path, const Representation& rep);
DiagnosticsRecord measure(const Path& path, const Representation& rep, std::size_t iter = 0);

/// x_n = x_0 + (n / N)(x_N - x_0), clamped to [0, 1].
Path init_linear(const Tensor& x0, const Tensor& xN, std::size_t steps);

/// Gradient of rep_energy with respect to the interior frames; endpoint
/// slots are zero.
PathField grad_rep_energy(const Path& path, const Representation& rep);
/// Gradient of pixel_energy with respect to the interior frames; endpoint
/// slots are zero.
PathField grad_pixel_energy(const Path& path);

/// dp minus its component along dr, inner product taken over the whole
/// path. Returns dp unchanged when the RMS norm of dr is below eps.
PathField project_out(const PathField& dp, const PathField& dr, double eps);

/// Adam on the interior frames for `iterations` steps, clamping pixels to
/// [0, 1] after every update. Returns the lowest-energy iterate visited, so
/// the result never has higher energy than the input. Throws GeodesicError
/// if the energy becomes non-finite.
Path minimize_rep_energy(Path path, const Representation& rep, const AdamSettings& adam,
                         std::size_t iterations);
Path minimize_rep_energy(Path path, const Representation& rep, const GeodesicConfig& cfg);

struct SynthResult {
  Path path;
  Diagnostics diagnostics;
};

/// Conditional geodesic: linear initialization, minimization of the
/// representational energy, then projected pixel-energy descent steps each
/// followed by re-minimization until E[path] stalls or outer_max is hit.
SynthResult synth_geodesic(const Tensor& x0, const Tensor& xN, const Representation& rep,
                           const GeodesicConfig& cfg);

}  // namespace repgeo

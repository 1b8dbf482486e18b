#include "repgeo/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "repgeo/error.hpp"

namespace repgeo {

namespace {

void clamp_unit(Tensor& t) {
  for (auto& v : t.storage()) v = std::clamp(v, 0.0, 1.0);
}

std::vector<double> step_distances(const std::vector<Tensor>& ys) {
  std::vector<double> d;
  d.reserve(ys.size());
  for (std::size_t n = 1; n < ys.size(); ++n) d.push_back(std::sqrt(squared_distance(ys[n], ys[n - 1])));
  return d;
}

double cv_of(const std::vector<double>& d) {
  if (d.empty()) return 0.0;
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  if (mean <= 0.0) return 0.0;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d.size());
  return std::sqrt(var) / mean;
}

PathField zeros_like(const Path& path) {
  PathField g;
  g.reserve(path.frames.size());
  for (const auto& f : path.frames) g.emplace_back(f.shape());
  return g;
}

void require_rep_input(const Path& path, const Representation& rep) {
  validate_path(path);
  if (path.front().shape() != rep.input_shape()) {
    throw ShapeError("path frames " + shape_to_string(path.front().shape()) +
                     " do not match representation input " + shape_to_string(rep.input_shape()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Path helpers

void validate_path(const Path& path) {
  if (path.frames.empty()) throw ShapeError("path has no frames");
  for (const auto& f : path.frames) {
    if (f.shape() != path.frames.front().shape()) {
      throw ShapeError("path frames differ in shape: " + shape_to_string(f.shape()) + " vs " +
                       shape_to_string(path.frames.front().shape()));
    }
  }
}

double dot(const PathField& a, const PathField& b) {
  if (a.size() != b.size()) throw ShapeError("path fields differ in length");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += dot(a[i], b[i]);
  return acc;
}

double squared_norm(const PathField& a) {
  double acc = 0.0;
  for (const auto& t : a) acc += squared_norm(t);
  return acc;
}

// ---------------------------------------------------------------------------

void GeodesicConfig::validate() const {
  if (steps < 2) throw ConfigError("geodesic: N must be >= 2");
  if (!(adam.step_size > 0.0) || !(adam.eps > 0.0)) {
    throw ConfigError("geodesic: Adam step size and eps must be positive");
  }
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("geodesic: Adam betas must lie in (0, 1)");
  }
  if (!(projection_step > 0.0)) throw ConfigError("geodesic: projection step must be positive");
  if (!(outer_tol > 0.0) || !(rep_tol > 0.0) || !(projection_eps > 0.0)) {
    throw ConfigError("geodesic: tolerances must be positive");
  }
  if (outer_window < 1) throw ConfigError("geodesic: outer window must be >= 1");
  if (!(rep_floor >= 0.0 && rep_floor < 1.0)) throw ConfigError("geodesic: rep floor must lie in [0, 1)");
}

std::string_view to_string(SynthStatus status) {
  switch (status) {
    case SynthStatus::converged: return "converged";
    case SynthStatus::max_outer_reached: return "max_outer_reached";
    case SynthStatus::diverged: return "diverged";
    case SynthStatus::reprojection_failed: return "reprojection_failed";
  }
  return "unknown";
}

std::string diagnostics_csv(const Diagnostics& diagnostics) {
  std::ostringstream os;
  os.precision(17);
  os << "iter,rep_energy,pixel_energy,rep_length,equispacing_cv\n";
  for (const auto& r : diagnostics.log) {
    os << r.iter << ',' << r.rep_energy << ',' << r.pixel_energy << ',' << r.rep_length << ','
       << r.equispacing_cv << '\n';
  }
  return os.str();
}

std::vector<Tensor> responses(const Path& path, const Representation& rep) {
  require_rep_input(path, rep);
  std::vector<Tensor> ys;
  ys.reserve(path.frames.size());
  for (const auto& f : path.frames) ys.push_back(rep.evaluate(f));
  return ys;
}

double rep_length(const Path& path, const Representation& rep) {
  double acc = 0.0;
  for (double d : step_distances(responses(path, rep))) acc += d;
  return acc;
}

double rep_energy(const Path& path, const Representation& rep) {
  const auto ys = responses(path, rep);
  double acc = 0.0;
  for (std::size_t n = 1; n < ys.size(); ++n) acc += squared_distance(ys[n], ys[n - 1]);
  return acc;
}

double pixel_energy(const Path& path) {
  validate_path(path);
  double acc = 0.0;
  for (std::size_t n = 1; n < path.frames.size(); ++n) {
    acc += squared_distance(path.frames[n], path.frames[n - 1]);
  }
  return acc;
}

double equispacing_cv(const Path& path, const Representation& rep) {
  return cv_of(step_distances(responses(path, rep)));
}

DiagnosticsRecord measure(const Path& path, const Representation& rep, std::size_t iter) {
  const auto ys = responses(path, rep);
  const auto d = step_distances(ys);
  DiagnosticsRecord r;
  r.iter = iter;
  for (double v : d) {
    r.rep_length += v;
    r.rep_energy += v * v;
  }
  r.pixel_energy = pixel_energy(path);
  r.equispacing_cv = cv_of(d);
  return r;
}

Path init_linear(const Tensor& x0, const Tensor& xN, std::size_t steps) {
  require_same_shape(x0, xN, "init_linear");
  if (steps < 2) throw ConfigError("init_linear: N must be >= 2");
  Path path;
  path.frames.reserve(steps + 1);
  path.frames.push_back(x0);
  const double N = static_cast<double>(steps);
  for (std::size_t n = 1; n < steps; ++n) {
    Tensor f(x0.shape());
    // x0 + t (xN - x0) keeps the path exactly constant when x0 == xN.
    const double t = static_cast<double>(n) / N;
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = x0[i] + t * (xN[i] - x0[i]);
    clamp_unit(f);
    path.frames.push_back(std::move(f));
  }
  path.frames.push_back(xN);
  return path;
}

PathField grad_rep_energy(const Path& path, const Representation& rep) {
  require_rep_input(path, rep);
  const std::size_t last = path.frames.size() - 1;
  PathField g = zeros_like(path);
  if (last < 2) return g;

  std::vector<Linearization> lin(path.frames.size());
  std::vector<Tensor> ys(path.frames.size());
  for (std::size_t n = 0; n <= last; ++n) {
    if (n == 0 || n == last) {
      ys[n] = rep.evaluate(path.frames[n]);
    } else {
      lin[n] = rep.linearize(path.frames[n]);
      ys[n] = lin[n].value;
    }
  }
  for (std::size_t n = 1; n < last; ++n) {
    Tensor cot(ys[n].shape());
    for (std::size_t i = 0; i < cot.size(); ++i) {
      cot[i] = 2.0 * (2.0 * ys[n][i] - ys[n - 1][i] - ys[n + 1][i]);
    }
    g[n] = lin[n].pullback(cot);
  }
  return g;
}

PathField grad_pixel_energy(const Path& path) {
  validate_path(path);
  const std::size_t last = path.frames.size() - 1;
  PathField g = zeros_like(path);
  for (std::size_t n = 1; n < last; ++n) {
    const auto& prev = path.frames[n - 1];
    const auto& cur = path.frames[n];
    const auto& next = path.frames[n + 1];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      g[n][i] = 2.0 * (2.0 * cur[i] - prev[i] - next[i]);
    }
  }
  return g;
}

PathField project_out(const PathField& dp, const PathField& dr, double eps) {
  if (dp.size() != dr.size()) throw ShapeError("project_out: path fields differ in length");
  for (std::size_t n = 0; n < dp.size(); ++n) require_same_shape(dp[n], dr[n], "project_out");
  std::size_t count = 0;
  for (const auto& t : dr) count += t.size();
  const double rr = squared_norm(dr);
  if (count == 0 || std::sqrt(rr / static_cast<double>(count)) < eps) return dp;
  const double coef = dot(dr, dp) / rr;
  PathField out = dp;
  for (std::size_t n = 0; n < out.size(); ++n) {
    for (std::size_t i = 0; i < out[n].size(); ++i) out[n][i] -= coef * dr[n][i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

Path minimize_rep_energy(Path path, const Representation& rep, const AdamSettings& adam,
                         std::size_t iterations) {
  require_rep_input(path, rep);
  const std::size_t last = path.frames.size() - 1;
  if (last < 2) return path;

  const Tensor y_first = rep.evaluate(path.frames.front());
  const Tensor y_last = rep.evaluate(path.frames.back());

  PathField m = zeros_like(path), v = zeros_like(path);
  std::vector<Linearization> lin(path.frames.size());
  double best_energy = INFINITY;
  Path best = path;
  double b1t = 1.0, b2t = 1.0;

  auto value = [&](std::size_t n) -> const Tensor& {
    if (n == 0) return y_first;
    if (n == last) return y_last;
    return lin[n].value;
  };

  for (std::size_t it = 0; it <= iterations; ++it) {
    for (std::size_t n = 1; n < last; ++n) lin[n] = rep.linearize(path.frames[n]);
    double energy = 0.0;
    for (std::size_t n = 1; n <= last; ++n) energy += squared_distance(value(n), value(n - 1));
    if (!std::isfinite(energy)) {
      Diagnostics d;
      d.status = SynthStatus::diverged;
      d.message = "representational energy became non-finite at Adam iteration " +
                  std::to_string(it);
      throw GeodesicError(d.message, std::move(best), std::move(d));
    }
    if (energy < best_energy) {
      best_energy = energy;
      best = path;
    }
    if (it == iterations) break;

    b1t *= adam.beta1;
    b2t *= adam.beta2;
    const double lr = adam.step_size;
    for (std::size_t n = 1; n < last; ++n) {
      const Tensor& y = value(n);
      const Tensor& yp = value(n - 1);
      const Tensor& yn = value(n + 1);
      Tensor cot(y.shape());
      for (std::size_t i = 0; i < cot.size(); ++i) cot[i] = 2.0 * (2.0 * y[i] - yp[i] - yn[i]);
      const Tensor g = lin[n].pullback(cot);

      Tensor& x = path.frames[n];
      Tensor& mn = m[n];
      Tensor& vn = v[n];
      for (std::size_t i = 0; i < x.size(); ++i) {
        mn[i] = adam.beta1 * mn[i] + (1.0 - adam.beta1) * g[i];
        vn[i] = adam.beta2 * vn[i] + (1.0 - adam.beta2) * g[i] * g[i];
        const double mhat = mn[i] / (1.0 - b1t);
        const double vhat = vn[i] / (1.0 - b2t);
        x[i] = std::clamp(x[i] - lr * mhat / (std::sqrt(vhat) + adam.eps), 0.0, 1.0);
      }
    }
  }
  return best;
}

Path minimize_rep_energy(Path path, const Representation& rep, const GeodesicConfig& cfg) {
  return minimize_rep_energy(std::move(path), rep, cfg.adam, cfg.inner_iters);
}

// ---------------------------------------------------------------------------
// Conditional geodesic

SynthResult synth_geodesic(const Tensor& x0, const Tensor& xN, const Representation& rep,
                           const GeodesicConfig& cfg) {
  cfg.validate();
  require_same_shape(x0, xN, "synth_geodesic");
  if (x0.shape() != rep.input_shape()) {
    throw ShapeError("synth_geodesic: images " + shape_to_string(x0.shape()) +
                     " do not match representation input " + shape_to_string(rep.input_shape()));
  }

  Diagnostics diag;
  Path path = init_linear(x0, xN, cfg.steps);
  {
    const auto r = measure(path, rep);
    diag.initial_rep_energy = r.rep_energy;
    diag.initial_pixel_energy = r.pixel_energy;
  }

  auto fail = [&](SynthStatus status, std::string message, Path last_good) {
    diag.status = status;
    diag.message = std::move(message);
    throw GeodesicError(diag.message, std::move(last_good), diag);
  };

  try {
    path = minimize_rep_energy(std::move(path), rep, cfg.adam, cfg.inner_iters);
  } catch (const GeodesicError& e) {
    fail(SynthStatus::diverged, e.what(), e.path());
  }
  DiagnosticsRecord current = measure(path, rep, 0);
  diag.log.push_back(current);

  const double pixel_scale = current.pixel_energy;
  double best_rep = current.rep_energy;
  const double rep_zero = cfg.rep_floor * diag.initial_rep_energy;
  std::size_t stalled = 0;
  diag.status = SynthStatus::max_outer_reached;

  for (std::size_t outer = 1; outer <= cfg.outer_max; ++outer) {
    if (current.pixel_energy <= 0.0) {
      diag.status = SynthStatus::converged;
      break;
    }
    const PathField dr = grad_rep_energy(path, rep);
    const PathField dp = grad_pixel_energy(path);
    const PathField step = project_out(dp, dr, cfg.projection_eps);

    double lambda = cfg.projection_step;
    bool accepted = false;
    bool rep_failure = false;
    Path candidate;
    DiagnosticsRecord measured;
    for (std::size_t attempt = 0; attempt <= cfg.max_backtracks; ++attempt) {
      candidate = path;
      for (std::size_t n = 1; n + 1 < candidate.frames.size(); ++n) {
        Tensor& f = candidate.frames[n];
        for (std::size_t i = 0; i < f.size(); ++i) {
          f[i] = std::clamp(f[i] - lambda * step[n][i], 0.0, 1.0);
        }
      }
      try {
        candidate = minimize_rep_energy(std::move(candidate), rep, cfg.adam, cfg.reproject_iters);
      } catch (const GeodesicError& e) {
        fail(SynthStatus::diverged, e.what(), path);
      }
      measured = measure(candidate, rep, outer);
      rep_failure =
          measured.rep_energy > (1.0 + cfg.rep_tol) * std::max(best_rep, rep_zero);
      const bool pixel_rise =
          measured.pixel_energy > current.pixel_energy + cfg.rep_tol * pixel_scale;
      if (!rep_failure && !pixel_rise) {
        accepted = true;
        break;
      }
      ++diag.rejected_steps;
      lambda *= 0.5;
    }

    if (!accepted) {
      if (rep_failure) {
        fail(SynthStatus::reprojection_failed,
             "re-minimization could not restore the representational energy within " +
                 std::to_string(cfg.rep_tol) + " of " + std::to_string(best_rep) +
                 " at outer iteration " + std::to_string(outer),
             path);
      }
      // Every shortened step raised E[path]: no further descent is available.
      diag.status = SynthStatus::converged;
      break;
    }

    const double prev_pixel = current.pixel_energy;
    path = std::move(candidate);
    current = measured;
    diag.log.push_back(current);
    best_rep = std::min(best_rep, current.rep_energy);

    const double rel_decrease = (prev_pixel - current.pixel_energy) / prev_pixel;
    stalled = rel_decrease < cfg.outer_tol ? stalled + 1 : 0;
    if (stalled >= cfg.outer_window) {
      diag.status = SynthStatus::converged;
      break;
    }
  }

  return {std::move(path), std::move(diag)};
}

}  // namespace repgeo

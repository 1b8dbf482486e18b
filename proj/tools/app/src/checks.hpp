#pragma once

#include <cstddef>
#include <filesystem>

#include <json.hpp>

namespace repgeo::app {

inline constexpr double kGradientTolerance = 1e-4;
/// Paths whose representational energy falls below this fraction of the
/// linear path's are treated as collapsed; the spacing audit skips them.
inline constexpr double kCollapsedFraction = 1e-4;

/// Finite-difference sweep over every layer kind, every preset's pullback,
/// the representational energy gradient and the pixel energy gradient,
/// `instances` seeded instances each. Report fields: operators[] with
/// name, instances, max_relative_error, refined_coordinates
/// (probes that needed a smaller step, see GradientCheckOptions), passed; and an overall passed.
nlohmann::json gradient_sweep(std::size_t instances, double tolerance = kGradientTolerance);

/// Audits a synth run directory from its diagnostics.csv and manifest:
/// L^2 <= N E on every logged row, equispacing CV of row 0 <= cv_max
/// unless the path collapsed, pixel energy never rising by more than
/// rep_tol times its row-0 value, and the final representational energy
/// within rep_tol of row 0 (or of rep-floor times the linear path's energy,
/// whichever is larger).
nlohmann::json audit_run(const std::filesystem::path& run, double cv_max);

}  // namespace repgeo::app

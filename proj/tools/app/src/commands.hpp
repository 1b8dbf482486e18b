#pragma once

#include <filesystem>
#include <iosfwd>

#include "options.hpp"

namespace repgeo::app {

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// Each command writes into `dir` and returns an ExitCode. Invalid input is
// reported by throwing; run_cli maps exceptions to kInvalidInput.
int cmd_transform(TransformOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_synth(SynthOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_slice(SliceOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_rf(RfOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_deviation(DeviationOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_compare(CompareOptions opts, const std::filesystem::path& dir, Context& ctx);
int cmd_check(CheckOptions opts, const std::filesystem::path& dir, Context& ctx);

}  // namespace repgeo::app

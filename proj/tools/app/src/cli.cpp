#include "repgeo_app/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "commands.hpp"
#include "config.hpp"
#include "options.hpp"
#include "run_dir.hpp"

namespace repgeo::app {

namespace {

struct FlagBinder {
  CLI::App* app;

  template <class T>
  void operator()(const char* name, T& member, const char* help) const {
    app->add_option(std::string("--") + name, member, help);
  }
  void operator()(const char* name, bool& member, const char* help) const {
    app->add_flag(std::string("--") + name, member, help);
  }
  void operator()(const char* name, FilePath& member, const char* help) const {
    app->add_option(std::string("--") + name, member.value, help);
  }
};

// --config is resolved before flag parsing so that flags override it. A run
// manifest is accepted too; its "config" member is used.
std::string find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

template <class Opts>
void load_config(const std::string& file, Opts& opts) {
  if (file.empty()) return;
  json j;
  try {
    j = json::parse(read_text(file));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + file + ": " + e.what());
  }
  if (j.contains("config") && j.contains("artifacts")) j = j.at("config");
  if (!j.is_object()) throw std::invalid_argument("config " + file + " is not a JSON object");
  const fs::path base = fs::path(file).parent_path();
  try {
    opts.fields(ConfigReader{j, base});
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + file + ": " + e.what());
  }
}

template <class Opts>
struct Command {
  Opts opts;
  std::string out;
  std::string config;
  CLI::App* sub = nullptr;

  void bind(CLI::App& app, const char* name, const char* help, bool with_out = true) {
    sub = app.add_subcommand(name, help);
    opts.fields(FlagBinder{sub});
    sub->add_option("--config", config, "JSON file of flag values, or a run manifest");
    if (with_out) sub->add_option("--out", out, std::string("output directory (default: $") + kOutRootEnv + "/<command>-<time>)");
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Representational geodesics: synthesis and diagnostics", "repgeo"};
  app.set_version_flag("--version", REPGEO_VERSION);
  app.require_subcommand(1);

  Command<TransformOptions> transform;
  Command<SynthOptions> synth;
  Command<SliceOptions> slice;
  Command<RfOptions> rf;
  Command<DeviationOptions> deviation;
  Command<CompareOptions> compare;
  Command<CheckOptions> check;
  transform.bind(app, "transform", "ground-truth path of a translation, rotation or dilation");
  synth.bind(app, "synth", "synthesize a geodesic between two images");
  slice.bind(app, "slice", "temporal slice of a run's frames");
  rf.bind(app, "rf", "receptive-field map of a stack");
  deviation.bind(app, "deviation", "deviation of a run's responses from a straight line");
  compare.bind(app, "compare", "frame-wise RMSE between two runs");
  check.bind(app, "check", "gradient checks and run audits");

  const std::string config = find_config(args);
  try {
    // Only the selected command's options receive the file; others keep
    // defaults and are never run.
    if (!config.empty() && !args.empty()) {
      const std::string& name = args.front();
      if (name == "transform") load_config(config, transform.opts);
      else if (name == "synth") load_config(config, synth.opts);
      else if (name == "slice") load_config(config, slice.opts);
      else if (name == "rf") load_config(config, rf.opts);
      else if (name == "deviation") load_config(config, deviation.opts);
      else if (name == "compare") load_config(config, compare.opts);
      else if (name == "check") load_config(config, check.opts);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  Context ctx{out, err};
  try {
    if (*transform.sub)
      return cmd_transform(transform.opts, output_dir(transform.out, "transform"), ctx);
    if (*synth.sub) return cmd_synth(synth.opts, output_dir(synth.out, "synth"), ctx);
    if (*slice.sub) return cmd_slice(slice.opts, output_dir(slice.out, "slice"), ctx);
    if (*rf.sub) return cmd_rf(rf.opts, output_dir(rf.out, "rf"), ctx);
    if (*deviation.sub)
      return cmd_deviation(deviation.opts, output_dir(deviation.out, "deviation"), ctx);
    if (*compare.sub)
      return cmd_compare(compare.opts, output_dir(compare.out, "compare"), ctx);
    if (*check.sub) return cmd_check(check.opts, output_dir(check.out, "check"), ctx);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}

}  // namespace repgeo::app

#include <doctest.h>
#include <unistd.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../support/assets.hpp"
#include "repgeo/geodesic.hpp"
#include "repgeo/image_io.hpp"
#include "repgeo/metrics.hpp"
#include "repgeo/tensor_io.hpp"
#include "repgeo/transforms.hpp"
#include "repgeo_app/cli.hpp"
#include "run_dir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repgeo;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("repgeo_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

json manifest(const fs::path& dir) { return json::parse(app::read_text(dir / "manifest.json")); }

std::string recipe(const std::string& name) {
  return (fs::path(REPGEO_RECIPE_DIR) / (name + ".json")).string();
}

std::string asset(const std::string& rel) { return (test_assets::asset_dir() / rel).string(); }

// Small endpoint pair written as tensors.
std::pair<std::string, std::string> small_pair(const fs::path& dir) {
  fs::create_directories(dir);
  const Tensor a = test_assets::seeded_crop(test_assets::natural_image(1), 16, 5);
  const Tensor b = test_assets::seeded_crop(test_assets::natural_image(2), 16, 6);
  write_tensor(dir / "a.tensor", a);
  write_tensor(dir / "b.tensor", b);
  return {(dir / "a.tensor").string(), (dir / "b.tensor").string()};
}

}  // namespace

TEST_CASE("the shipped pair is comparison crop 0 and its 8 px circular shift") {
  const Tensor x0 = read_png(asset("pairs/translate8_x0.png"));
  const Tensor xn = read_png(asset("pairs/translate8_xN.png"));
  CHECK(x0 == test_assets::comparison_crop(0));
  CHECK(xn == apply(TransformSpec::translation(8.0), x0, 1.0));
}

TEST_CASE("transform writes N + 1 frames and a manifest of existing files") {
  const fs::path out = scratch("transform");
  const auto r = run({"transform", "--config", recipe("transform_translate8"), "--out", out.string()});
  REQUIRE(r.code == app::kOk);
  const Path p = app::read_frames(out);
  CHECK(p.frames.size() == 11);
  CHECK(p.frames[5] == apply(TransformSpec::translation(8.0), p.front(), 0.5));
  CHECK(p.frames[10] == read_png(asset("pairs/translate8_xN.png")));

  const json m = manifest(out);
  CHECK(m["command"] == "transform");
  CHECK(m["config"]["dx"] == 8.0);
  CHECK(m["config"]["input"] == "inputs/input.tensor");
  for (const auto& a : m["artifacts"]) {
    const fs::path f = out / a["file"].get<std::string>();
    REQUIRE(fs::exists(f));
    CHECK(app::sha256_file(f) == a["sha256"]);
    CHECK(fs::file_size(f) == a["bytes"]);
  }
}

TEST_CASE("flags override config values") {
  const fs::path out = scratch("override");
  REQUIRE(run({"transform", "--config", recipe("transform_translate8"), "--dx", "4", "--n", "4", "--out",
               out.string()})
              .code == app::kOk);
  CHECK(manifest(out)["config"]["dx"] == 4.0);
  CHECK(app::read_frames(out).frames.size() == 5);
}

TEST_CASE("replaying a manifest reproduces artifacts bitwise") {
  const fs::path a = scratch("replay_a"), b = scratch("replay_b");
  REQUIRE(run({"transform", "--config", recipe("transform_rotate4"), "--out", a.string()}).code == 0);
  REQUIRE(run({"transform", "--config", (a / "manifest.json").string(), "--out", b.string()}).code == 0);
  CHECK(manifest(a)["artifacts"] == manifest(b)["artifacts"]);
  CHECK(manifest(a)["config"] == manifest(b)["config"]);
}

TEST_CASE("invalid input exits with 2 and a message") {
  const fs::path out = scratch("invalid");
  auto r = run({"transform", "--input", "/nonexistent.png", "--out", out.string()});
  CHECK(r.code == app::kInvalidInput);
  CHECK(r.err.find("/nonexistent.png") != std::string::npos);
  CHECK(run({"transform", "--input", asset("pairs/translate8_x0.png"), "--kind", "shear", "--out",
             out.string()})
            .code == app::kInvalidInput);
  CHECK(run({"transform", "--no-such-flag"}).code == app::kInvalidInput);
  CHECK(run({}).code == app::kInvalidInput);
  fs::create_directories(out);
  app::write_text(out / "bad.json", "{ not json");
  CHECK(run({"transform", "--config", (out / "bad.json").string()}).code == app::kInvalidInput);
  CHECK(run({"rf", "--stack", "no_such_preset", "--out", out.string()}).code == app::kInvalidInput);
  CHECK(run({"rf", "--stack", "smallnet_l2", "--size", "32", "--y", "99", "--n-noise", "2", "--out",
             out.string()})
            .code == app::kInvalidInput);
  CHECK(run({"--help"}).code == app::kOk);
}

TEST_CASE("synth with the pixel preset returns the linear path") {
  const fs::path dir = scratch("synth_pixel");
  const auto [a, b] = small_pair(dir / "in");
  const auto r = run({"synth", "--x0", a, "--xn", b, "--stack", "pixel", "--inner-iters", "200",
                      "--reproject-iters", "20", "--out", (dir / "run").string()});
  CHECK(r.code == app::kOk);
  const Path p = app::read_frames(dir / "run");
  const Path lin = init_linear(read_tensor(a), read_tensor(b), 10);
  for (std::size_t n = 0; n < p.frames.size(); ++n) {
    for (std::size_t i = 0; i < p.frames[n].size(); ++i) CHECK(std::abs(p.frames[n][i] - lin.frames[n][i]) <= 1e-4);
  }
  const std::string csv = app::read_text(dir / "run" / "diagnostics.csv");
  CHECK(csv.rfind("iter,rep_energy,pixel_energy,rep_length,equispacing_cv\n", 0) == 0);
  CHECK(manifest(dir / "run")["result"]["status"] == "converged");

  SUBCASE("audits pass on the run and fail on a doctored log") {
    const fs::path report = dir / "check";
    CHECK(run({"check", "--runs", (dir / "run").string(), "--out", report.string()}).code == app::kOk);
    CHECK(json::parse(app::read_text(report / "report.json"))["passed"] == true);

    fs::copy(dir / "run", dir / "doctored", fs::copy_options::recursive);
    app::write_text(dir / "doctored" / "diagnostics.csv",
                    "iter,rep_energy,pixel_energy,rep_length,equispacing_cv\n"
                    "0,1,10,3,0\n1,1,12,3,0\n");
    CHECK(run({"check", "--runs", (dir / "doctored").string(), "--out", report.string()}).code ==
          app::kCheckFailed);
  }
}

TEST_CASE("identical endpoints give a constant path; outer-max reached exits with 3") {
  const fs::path dir = scratch("synth_const");
  const auto [a, b] = small_pair(dir / "in");
  const auto r = run({"synth", "--x0", a, "--xn", a, "--stack", "smallnet_l2", "--inner-iters", "5",
                      "--reproject-iters", "2", "--out", (dir / "const").string()});
  CHECK((r.code == app::kOk || r.code == app::kNotConverged));
  const Path p = app::read_frames(dir / "const");
  for (const auto& f : p.frames) CHECK(f == read_tensor(a));

  const auto s = run({"synth", "--x0", a, "--xn", b, "--stack", "pixel", "--inner-iters", "5",
                      "--reproject-iters", "2", "--outer-max", "1", "--out", (dir / "capped").string()});
  CHECK(s.code == app::kNotConverged);
  CHECK(manifest(dir / "capped")["result"]["status"] == "max_outer_reached");
  CHECK(app::read_frames(dir / "capped").frames.size() == 11);
}

TEST_CASE("slice matches the library bitwise; compare and deviation write their CSVs") {
  const fs::path gt = scratch("slice_gt");
  REQUIRE(run({"transform", "--config", recipe("transform_translate8"), "--out", gt.string()}).code == 0);
  const fs::path out = scratch("slice");
  REQUIRE(run({"slice", "--run", gt.string(), "--axis", "row", "--index", "20", "--out", out.string()}).code == 0);
  CHECK(read_tensor(out / "slice.tensor") == temporal_slice(app::read_frames(gt), SliceAxis::row, 20));

  const fs::path cmp = scratch("compare");
  REQUIRE(run({"compare", "--run", gt.string(), "--reference", gt.string(), "--out", cmp.string()}).code == 0);
  CHECK(manifest(cmp)["result"]["mean_rmse"] == 0.0);

  const fs::path dev = scratch("deviation");
  REQUIRE(run({"deviation", "--run", gt.string(), "--stack", "pixel", "--out", dev.string()}).code == 0);
  CHECK(fs::exists(dev / "deviation.csv"));
  CHECK(manifest(dev)["result"]["max_deviation"].get<double>() > 0.0);
}

TEST_CASE("rf runs with one seed are bitwise identical") {
  const fs::path a = scratch("rf_a"), b = scratch("rf_b");
  const std::vector<std::string> args{"rf", "--stack", "smallnet_l2", "--size", "32", "--n-noise", "4", "--seed", "3"};
  auto with_out = [&](const fs::path& o) {
    auto v = args;
    v.push_back("--out");
    v.push_back(o.string());
    return v;
  };
  REQUIRE(run(with_out(a)).code == 0);
  REQUIRE(run(with_out(b)).code == 0);
  CHECK(manifest(a)["artifacts"] == manifest(b)["artifacts"]);
  CHECK(fs::exists(a / "rf.png"));
  CHECK(fs::exists(a / "rf_size.csv"));
}

TEST_CASE("output root comes from the environment") {
  const fs::path root = scratch("root");
  ::setenv(app::kOutRootEnv, root.string().c_str(), 1);
  const auto r = run({"rf", "--stack", "pixel", "--size", "8", "--n-noise", "1"});
  ::unsetenv(app::kOutRootEnv);
  REQUIRE(r.code == app::kOk);
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(root)) runs += e.path().filename().string().rfind("rf-", 0) == 0;
  CHECK(runs == 1);
}

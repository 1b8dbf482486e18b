#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "repgeo/path.hpp"
#include "repgeo/tensor.hpp"

namespace repgeo::app {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kManifestName = "manifest.json";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& file);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

/// Writes frame_%03d.png (8 bit, for viewing) and frame_%03d.tensor (exact)
/// for every frame. Returns the file names relative to `dir`.
std::vector<std::string> write_frames(const fs::path& dir, const Path& path);

/// Reads frame_000.tensor, frame_001.tensor, ... until the first gap.
/// Throws IoError if `dir` holds no frames.
Path read_frames(const fs::path& dir);

/// Writes `tensor` to `<stem>.tensor` and a display PNG to `<stem>.png`;
/// `normalize` rescales to [0, 1] for the PNG only.
std::vector<std::string> write_image_pair(const fs::path& dir, const std::string& stem,
                                          const Tensor& tensor, bool normalize);

void write_text(const fs::path& file, const std::string& text);
std::string read_text(const fs::path& file);

/// Collects artifacts and writes manifest.json last, so a manifest is only
/// present when every file it lists exists.
class RunRecorder {
 public:
  RunRecorder(fs::path dir, std::string command);

  const fs::path& dir() const { return dir_; }
  void add(const std::string& relative);
  void add(const std::vector<std::string>& relative);
  void set_config(json config) { config_ = std::move(config); }
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  void finish();

 private:
  fs::path dir_;
  std::string command_;
  std::string started_;
  json config_ = json::object();
  json extra_ = json::object();
  std::vector<std::string> artifacts_;
};

/// Output directory: `requested` if nonempty, else
/// $REPGEO_OUT_ROOT/<command>-<timestamp> (root defaults to ./runs).
fs::path output_dir(const std::string& requested, const std::string& command);

}  // namespace repgeo::app

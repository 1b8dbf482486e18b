#include "run_dir.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "repgeo/image_io.hpp"
#include "repgeo/tensor_io.hpp"
#include "repgeo_app/cli.hpp"

namespace repgeo::app {

namespace {

std::string frame_stem(std::size_t n) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "frame_%03zu", n);
  return buf.data();
}

}  // namespace

std::string sha256_file(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot open " + file.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  hex.reserve(2 * len);
  static constexpr char digits[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 0xf];
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::vector<std::string> write_frames(const fs::path& dir, const Path& path) {
  std::vector<std::string> files;
  for (std::size_t n = 0; n < path.frames.size(); ++n) {
    const std::string stem = frame_stem(n);
    write_tensor(dir / (stem + ".tensor"), path.frames[n]);
    write_png(dir / (stem + ".png"), path.frames[n]);
    files.push_back(stem + ".png");
    files.push_back(stem + ".tensor");
  }
  return files;
}

Path read_frames(const fs::path& dir) {
  Path path;
  for (std::size_t n = 0;; ++n) {
    const fs::path file = dir / (frame_stem(n) + ".tensor");
    if (!fs::exists(file)) break;
    path.frames.push_back(read_tensor(file));
  }
  if (path.frames.empty()) throw IoError("no frame_000.tensor in " + dir.string());
  return path;
}

std::vector<std::string> write_image_pair(const fs::path& dir, const std::string& stem,
                                          const Tensor& tensor, bool normalize) {
  write_tensor(dir / (stem + ".tensor"), tensor);
  write_png(dir / (stem + ".png"), normalize ? normalize_for_display(tensor) : tensor);
  return {stem + ".png", stem + ".tensor"};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot open " + file.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + file.string());
}

std::string read_text(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunRecorder::RunRecorder(fs::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)), started_(utc_timestamp()) {
  fs::create_directories(dir_);
  // A stale manifest would describe files from an earlier run.
  fs::remove(dir_ / kManifestName);
}

void RunRecorder::add(const std::string& relative) { artifacts_.push_back(relative); }

void RunRecorder::add(const std::vector<std::string>& relative) {
  artifacts_.insert(artifacts_.end(), relative.begin(), relative.end());
}

void RunRecorder::finish() {
  json inventory = json::array();
  for (const auto& a : artifacts_) {
    inventory.push_back({{"file", a},
                         {"bytes", fs::file_size(dir_ / a)},
                         {"sha256", sha256_file(dir_ / a)}});
  }
  json m = {{"tool", "repgeo"},
            {"version", REPGEO_VERSION},
            {"command", command_},
            {"config", config_},
            {"artifacts", inventory},
            {"started", started_},
            {"finished", utc_timestamp()}};
  for (auto it = extra_.begin(); it != extra_.end(); ++it) m[it.key()] = it.value();
  write_text(dir_ / kManifestName, m.dump(2) + "\n");
}

fs::path output_dir(const std::string& requested, const std::string& command) {
  if (!requested.empty()) return requested;
  const char* root = std::getenv(kOutRootEnv);
  std::string stamp = utc_timestamp();
  for (auto& c : stamp)
    if (c == ':') c = '-';
  return fs::path(root && *root ? root : "runs") / (command + "-" + stamp);
}

}  // namespace repgeo::app

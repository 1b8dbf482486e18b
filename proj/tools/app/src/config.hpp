#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "options.hpp"

namespace repgeo::app {

struct ConfigReader {
  const nlohmann::json& j;
  const std::filesystem::path& base;

  template <class T>
  void operator()(const char* name, T& member, const char*) const {
    if (j.contains(name)) j.at(name).get_to(member);
  }
  void operator()(const char* name, double& member, const char*) const {
    // NaN marks "unset" and is written as null.
    if (j.contains(name)) member = j.at(name).is_null() ? kUnset : j.at(name).get<double>();
  }
  void operator()(const char* name, FilePath& member, const char*) const {
    if (!j.contains(name)) return;
    member.value = j.at(name).get<std::string>();
    if (member.value.empty()) return;
    const std::filesystem::path p(member.value);
    if (p.is_relative() && std::filesystem::exists(base / p)) member.value = (base / p).lexically_normal().string();
  }
};

struct ConfigWriter {
  nlohmann::json& j;

  template <class T>
  void operator()(const char* name, const T& member, const char*) const {
    j[name] = member;
  }
  void operator()(const char* name, const double& member, const char*) const {
    j[name] = std::isnan(member) ? nlohmann::json(nullptr) : nlohmann::json(member);
  }
  void operator()(const char* name, const FilePath& member, const char*) const { j[name] = member.value; }
};

template <class Opts>
nlohmann::json snapshot(Opts opts) {
  nlohmann::json j = nlohmann::json::object();
  opts.fields(ConfigWriter{j});
  return j;
}

}  // namespace repgeo::app

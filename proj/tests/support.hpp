#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "balnet/config.hpp"

namespace balnet::test {

inline ScenarioConfig preset(const std::string& name) { return parse_config(preset_text(name)); }
inline Model preset_model(const std::string& name) { return preset(name).model; }

/// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("balnet_" + tag + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace balnet::test

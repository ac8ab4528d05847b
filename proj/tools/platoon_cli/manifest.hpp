#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace platoon::cli {

/// Record written next to every command's outputs; enough to rerun the
/// command bit-for-bit with `platoon replay`.
struct RunManifest {
  std::string command;
  std::string toolkit_version;
  std::uint64_t base_seed = 0;
  std::string config_hash;       ///< empty for commands without a scenario
  std::string resolved_config;   ///< canonical scenario text
  nlohmann::json options = nlohmann::json::object();
  std::vector<std::string> outputs;  ///< paths relative to the output directory
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace platoon::cli

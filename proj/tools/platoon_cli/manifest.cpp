#include "platoon_cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include "platoon/errors.hpp"

namespace platoon::cli {

nlohmann::json to_json(const RunManifest& m) {
  return nlohmann::json{
      {"command", m.command},
      {"toolkit_version", m.toolkit_version},
      {"base_seed", m.base_seed},
      {"config_hash", m.config_hash},
      {"resolved_config", m.resolved_config},
      {"options", m.options},
      {"outputs", m.outputs},
  };
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.resolved_config = j.at("resolved_config").get<std::string>();
    m.options = j.at("options");
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest", e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << to_json(m).dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest", e.what());
  }
  return manifest_from_json(j);
}

}  // namespace platoon::cli

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "platoon/scenario.hpp"
#include "platoon_cli/manifest.hpp"

namespace platoon::cli {

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

struct Context {
  std::filesystem::path out_dir;
  std::ostream* out = nullptr;  ///< human-readable report; may be null
  unsigned workers = 0;         ///< 0 = hardware concurrency
};

/// $PLATOON_OUT_DIR if set, otherwise ./platoon-out.
std::filesystem::path default_out_dir();

/// Names accepted by run_command and recorded in manifests.
inline constexpr const char* kCommands[] = {"simulate",    "headway",       "stability",  "bound",
                                            "montecarlo", "validate-mean", "channel-log"};

/// Runs `command` with JSON `options`, writes its outputs and manifest.json
/// into ctx.out_dir and returns the manifest. Commands other than `headway`
/// require a scenario. Missing options take their documented defaults.
RunManifest run_command(const std::string& command, const std::optional<ScenarioConfig>& scenario,
                        const nlohmann::json& options, const Context& ctx);

/// Re-executes the run recorded in a manifest.
RunManifest replay(const std::filesystem::path& manifest_path, const Context& ctx);

}  // namespace platoon::cli

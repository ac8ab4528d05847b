#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "platoon/channel.hpp"
#include "platoon/control.hpp"
#include "platoon/dynamics.hpp"

namespace platoon {

struct FixedDecel {
  double value = 9.0;
  friend bool operator==(const FixedDecel&, const FixedDecel&) = default;
};
struct UniformDecel {
  double lo = 6.0;
  double hi = 9.0;
  friend bool operator==(const UniformDecel&, const UniformDecel&) = default;
};
/// Normal(mean, sd) conditioned on [lo, hi].
struct TruncatedNormalDecel {
  double mean = 7.5;
  double sd = 1.0;
  double lo = 4.5;
  double hi = 9.5;
  friend bool operator==(const TruncatedNormalDecel&, const TruncatedNormalDecel&) = default;
};

using DecelDistribution = std::variant<FixedDecel, UniformDecel, TruncatedNormalDecel>;

/// Everything needed to simulate one platoon experiment. Vehicle 0 is the
/// leader; followers are 1..n_followers.
struct ScenarioConfig {
  std::string name = "scenario";
  int n_followers = 5;
  double initial_speed_mps = 25.0;
  /// Bumper-to-bumper gap at standstill. The controller's reference spacing
  /// to vehicle i-1 is this gap plus the length of vehicle i-1.
  double standstill_gap_m = 5.0;

  VehicleParams vehicle;
  std::map<int, VehicleParams> vehicle_overrides;
  ControllerConfig controller;
  std::map<int, ControllerConfig> controller_overrides;

  ChannelSpec channel = IdealChannel{};
  LeaderProfile leader;
  /// When set, every vehicle's decel_limit is redrawn per realization.
  std::optional<DecelDistribution> decel;

  double dt_s = 0.01;
  double duration_s = 30.0;
  std::uint64_t realizations = 1;
  std::uint64_t seed = 1;

  VehicleParams vehicle_params(int index) const;
  ControllerConfig controller_for(int index) const;
  std::size_t steps() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError naming the offending key.
void validate(const ScenarioConfig& cfg);

/// Parses the sectioned key-value scenario format (see scenarios/*.scn).
/// Throws ConfigError with a `section.key` path on any problem.
ScenarioConfig parse_scenario(std::string_view text);

/// Reads and parses a scenario file. Throws IoError if it cannot be read.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Canonical text form: every key written in a fixed order with
/// round-trip number formatting. parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace platoon

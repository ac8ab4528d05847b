#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "platoon/random.hpp"
#include "platoon/scenario.hpp"

namespace platoon {

/// Vehicles `front` (= rear - 1) and `rear` overlapped at `time_s`.
struct CollisionEvent {
  double time_s = 0.0;
  int front = 0;
  int rear = 0;

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

struct RealizationResult {
  std::uint64_t index = 0;
  double dt = 0.0;
  /// spacing_errors[i - 1][k]: follower i at time k * dt, k = 0..steps.
  std::vector<std::vector<double>> spacing_errors;
  std::vector<CollisionEvent> collisions;  // time-ordered, one per pair at most
  std::vector<double> decel_limits;        // per vehicle, leader first
  /// states[k][i], only filled when RunOptions::record_states is set.
  std::vector<std::vector<VehicleState>> states;

  bool collided() const { return !collisions.empty(); }

  friend bool operator==(const RealizationResult&, const RealizationResult&) = default;
};

struct RunOptions {
  bool record_states = false;
};

/// Simulates one realization with per-step zero-order-hold control.
///
/// Each step: commands are computed from the current states (the follower
/// link draws one packet slot first), saturated to each vehicle's limits,
/// and all vehicles are propagated exactly. Adjacent pairs that overlap are
/// recorded once and both vehicles are frozen in place (v = a = 0) for the
/// rest of the run. Random streams come from (scenario.seed, index, stream).
/// Throws ConfigError for an invalid scenario.
RealizationResult run_realization(const ScenarioConfig& scenario, std::uint64_t index,
                                  const RunOptions& options = {});

/// Adjacent pairs (i-1, i) whose bumper-to-bumper gap
/// x_{i-1} - length_{i-1} - x_i is <= 0. Positions are leader first.
std::vector<std::pair<int, int>> detect_collisions(std::span<const double> positions,
                                                   std::span<const double> lengths);

std::vector<double> sample_decel_limits(const DecelDistribution& dist, std::size_t n, Rng& rng);

struct SafetyStats {
  std::size_t realizations = 0;
  std::size_t collided = 0;
  std::size_t total_events = 0;
  double p_collision = 0.0;
  /// Mean events over realizations with at least one collision; empty when
  /// none collided.
  std::optional<double> mean_events_per_unstable;
  double dt = 0.0;
  /// variance_series[i - 1][k]: unbiased cross-realization variance of
  /// follower i's spacing error at step k (0 with fewer than two runs).
  std::vector<std::vector<double>> variance_series;
};

/// Streaming reduction used by aggregate_stats; results must be added in
/// realization-index order for bit-reproducible output.
class SafetyAccumulator {
 public:
  void add(const RealizationResult& r);
  SafetyStats finish() const;
  std::size_t count() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::size_t collided_ = 0;
  std::size_t events_ = 0;
  double dt_ = 0.0;
  std::vector<std::vector<double>> mean_;
  std::vector<std::vector<double>> m2_;
};

/// Throws InvalidInputError on an empty list.
SafetyStats aggregate_stats(std::span<const RealizationResult> results);

/// Runs `count` realizations starting at `first_index` on up to `workers`
/// threads (0 = hardware concurrency) and hands each result to `sink` in
/// index order.
void for_each_realization(const ScenarioConfig& scenario, std::uint64_t first_index,
                          std::uint64_t count, unsigned workers, const RunOptions& options,
                          const std::function<void(RealizationResult&&)>& sink);

/// Safety study over scenario.realizations runs.
SafetyStats run_safety_study(const ScenarioConfig& scenario, unsigned workers = 0,
                             const std::function<void(const RealizationResult&)>& observe = {});

enum class StateComponent { kPosition = 0, kVelocity = 1, kAcceleration = 2 };

struct ComponentDeviation {
  double max_deviation = 0.0;   ///< max over time of |mean - deterministic|
  double max_envelope = 0.0;    ///< max over time of 3 sd / sqrt(n)
  double fraction_within = 1.0; ///< share of time steps with |dev| <= 3 sd / sqrt(n)
  bool within() const { return max_deviation <= max_envelope; }
};

struct MeanTrajectoryReport {
  std::size_t realizations = 0;
  double gamma = 1.0;
  double dt = 0.0;
  /// per_vehicle[i][c] for vehicle i (leader first) and component c.
  std::vector<std::array<ComponentDeviation, 3>> per_vehicle;
  /// deviation[k][3 i + c] = sample mean - deterministic equivalent.
  std::vector<std::vector<double>> deviation;
  /// sample_sd[k][3 i + c]: cross-realization standard deviation.
  std::vector<std::vector<double>> sample_sd;
  double max_deviation = 0.0;

  bool within_envelope() const;
};

/// Averages `n_realizations` stochastic runs pointwise and compares them to
/// the deterministic-equivalent run (feed-forward scaled by gamma). An ideal
/// or deterministic channel reproduces the reference exactly. Throws
/// InvalidInputError for n < 100.
MeanTrajectoryReport validate_mean_trajectory(const ScenarioConfig& scenario,
                                              std::size_t n_realizations, unsigned workers = 0);

}  // namespace platoon

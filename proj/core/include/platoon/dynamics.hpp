#pragma once

#include <optional>
#include <span>
#include <vector>

namespace platoon {

/// Longitudinal state of one vehicle: position (m), velocity (m/s),
/// realized acceleration (m/s^2).
struct VehicleState {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct VehicleParams {
  double tau = 0.5;           ///< actuation lag (s)
  double length = 5.0;        ///< body length (m)
  double decel_limit = 9.0;   ///< braking capability magnitude (m/s^2)
  double accel_limit = 3.0;   ///< acceleration capability (m/s^2)

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

/// Throws InvalidInputError unless tau, length and both limits are positive.
void validate(const VehicleParams& params);

/// One piece of a leader maneuver. From `start_s` onwards the leader is
/// commanded `u_mps2` until `target_mps` (if set) is reached, after which the
/// command reverts to zero.
struct LeaderSegment {
  double start_s = 0.0;
  double u_mps2 = 0.0;
  std::optional<double> target_mps;

  friend bool operator==(const LeaderSegment&, const LeaderSegment&) = default;
};

struct LeaderProfile {
  std::vector<LeaderSegment> segments;

  friend bool operator==(const LeaderProfile&, const LeaderProfile&) = default;
};

/// Throws InvalidInputError unless the first segment starts at t = 0 and
/// start times strictly increase. An empty profile is valid.
void validate(const LeaderProfile& profile);

/// Exact propagation of x'' = a, tau a' + a = u over one hold interval of
/// length dt with u held constant. Coefficients depending only on (tau, dt)
/// are computed once.
class LagPropagator {
 public:
  LagPropagator(double tau, double dt);

  /// Advances `state` by dt. If the velocity would cross zero inside the
  /// interval the vehicle is stopped there (v = a = 0, x at the crossing).
  VehicleState step(const VehicleState& state, double u) const;

  double tau() const noexcept { return tau_; }
  double dt() const noexcept { return dt_; }

 private:
  double velocity_at(const VehicleState& s, double u, double t) const;
  double position_at(const VehicleState& s, double u, double t) const;

  double tau_;
  double dt_;
  double decay_;       // exp(-dt/tau)
  double one_minus_;   // 1 - exp(-dt/tau), via expm1
};

/// Single-interval form of LagPropagator::step.
VehicleState step_vehicle(const VehicleState& state, double u, double dt,
                          const VehicleParams& params);

/// Leader command at time t.
///
/// A segment with a target velocity stops commanding once the target is met.
/// With `hold_projection_s > 0` (normally the leader's own lag) a positive
/// target is judged on the projected velocity v + a * hold_projection_s, so
/// the lagged acceleration bleeds off onto the target instead of overshooting
/// it. A zero target keeps braking until the vehicle is stopped.
double leader_input(const LeaderProfile& profile, const VehicleState& state, double t,
                    double hold_projection_s = 0.0);

/// x_i - x_{i-1} + d + h_w v_i; zero at the desired spacing, positive when
/// the follower is too close.
double spacing_error(const VehicleState& follower, const VehicleState& predecessor,
                     double h_w, double d);

}  // namespace platoon

#include "platoon/dynamics.hpp"

#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.v) && std::isfinite(s.a);
}

}  // namespace

void validate(const VehicleParams& params) {
  if (!(params.tau > 0.0) || !std::isfinite(params.tau)) {
    throw InvalidInputError("vehicle lag tau must be positive and finite");
  }
  if (!(params.length > 0.0) || !std::isfinite(params.length)) {
    throw InvalidInputError("vehicle length must be positive and finite");
  }
  if (!(params.decel_limit > 0.0) || !(params.accel_limit > 0.0)) {
    throw InvalidInputError("acceleration and deceleration limits must be positive");
  }
}

void validate(const LeaderProfile& profile) {
  if (profile.segments.empty()) return;
  if (profile.segments.front().start_s != 0.0) {
    throw InvalidInputError("first leader segment must start at t = 0");
  }
  for (std::size_t i = 1; i < profile.segments.size(); ++i) {
    if (!(profile.segments[i].start_s > profile.segments[i - 1].start_s)) {
      throw InvalidInputError("leader segment start times must strictly increase");
    }
  }
}

LagPropagator::LagPropagator(double tau, double dt) : tau_(tau), dt_(dt) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidInputError("lag tau must be positive and finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidInputError("step dt must be positive and finite");
  }
  one_minus_ = -std::expm1(-dt / tau);
  decay_ = 1.0 - one_minus_;
}

double LagPropagator::velocity_at(const VehicleState& s, double u, double t) const {
  const double om = -std::expm1(-t / tau_);
  return s.v + u * t + (s.a - u) * tau_ * om;
}

double LagPropagator::position_at(const VehicleState& s, double u, double t) const {
  const double om = -std::expm1(-t / tau_);
  return s.x + s.v * t + 0.5 * u * t * t + (s.a - u) * tau_ * (t - tau_ * om);
}

VehicleState LagPropagator::step(const VehicleState& s, double u) const {
  if (!finite(s) || !std::isfinite(u)) {
    throw InvalidInputError("vehicle state and input must be finite");
  }
  const double gap = s.a - u;
  VehicleState next;
  next.a = u + gap * decay_;
  next.v = s.v + u * dt_ + gap * tau_ * one_minus_;
  next.x = s.x + s.v * dt_ + 0.5 * u * dt_ * dt_ + gap * tau_ * (dt_ - tau_ * one_minus_);
  if (next.v >= 0.0) return next;

  // v(t) has a single-signed second derivative, so {t : v(t) >= 0} is an
  // interval starting at 0 and bisection finds its right end.
  double stop_t = 0.0;
  if (s.v > 0.0 || (s.v == 0.0 && s.a > 0.0)) {
    double lo = 0.0;
    double hi = dt_;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * dt_; ++it) {
      const double mid = 0.5 * (lo + hi);
      (velocity_at(s, u, mid) >= 0.0 ? lo : hi) = mid;
    }
    stop_t = lo;
  }
  return VehicleState{stop_t > 0.0 ? position_at(s, u, stop_t) : s.x, 0.0, 0.0};
}

VehicleState step_vehicle(const VehicleState& state, double u, double dt,
                          const VehicleParams& params) {
  return LagPropagator(params.tau, dt).step(state, u);
}

double leader_input(const LeaderProfile& profile, const VehicleState& state, double t,
                    double hold_projection_s) {
  const LeaderSegment* active = nullptr;
  for (const auto& seg : profile.segments) {
    if (seg.start_s <= t) active = &seg;
  }
  if (active == nullptr) return 0.0;
  if (!active->target_mps) return active->u_mps2;

  const double target = *active->target_mps;
  const double projected =
      target > 0.0 ? state.v + state.a * hold_projection_s : state.v;
  if (active->u_mps2 < 0.0 && projected <= target) return 0.0;
  if (active->u_mps2 > 0.0 && projected >= target) return 0.0;
  return active->u_mps2;
}

double spacing_error(const VehicleState& follower, const VehicleState& predecessor,
                     double h_w, double d) {
  return follower.x - predecessor.x + d + h_w * follower.v;
}

}  // namespace platoon

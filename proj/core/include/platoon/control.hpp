#pragma once

#include <optional>

#include "platoon/dynamics.hpp"

namespace platoon {

enum class ControlMode { kAcc, kCacc };

/// Constant-time-headway controller gains. `k_a` multiplies the communicated
/// predecessor acceleration and is ignored in ACC mode.
struct ControllerConfig {
  double k_a = 0.4;
  double k_v = 1.0;   // 1/s
  double k_p = 0.8;   // 1/s^2
  double h_w = 0.9;   // s
  ControlMode mode = ControlMode::kCacc;

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

void validate(const ControllerConfig& cfg);

/// CACC law. A dropped packet (`received_accel` empty) removes the
/// feed-forward term entirely.
double cacc_control(const VehicleState& own, const VehicleState& pred,
                    std::optional<double> received_accel, const ControllerConfig& cfg,
                    double d);

/// CACC law with the feed-forward term scaled by `weight`. weight = 1 or 0
/// reproduces a received or dropped packet; weight = gamma gives the
/// deterministic-equivalent (mean) system.
double cacc_control_weighted(const VehicleState& own, const VehicleState& pred,
                             double pred_accel, double weight, const ControllerConfig& cfg,
                             double d);

/// ACC law: the CACC law without the communicated term.
double acc_control(const VehicleState& own, const VehicleState& pred,
                   const ControllerConfig& cfg, double d);

/// Clamps a command to the vehicle's capability [-decel_limit, accel_limit].
double saturate(double u, const VehicleParams& params);

/// Headway lower bound 2 tau / (1 + gamma k_a).
double min_headway(double tau, double gamma, double k_a);

}  // namespace platoon

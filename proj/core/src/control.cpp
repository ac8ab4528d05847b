#include "platoon/control.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

double feedback(const VehicleState& own, const VehicleState& pred, const ControllerConfig& cfg,
                double d) {
  return -cfg.k_v * (own.v - pred.v) - cfg.k_p * spacing_error(own, pred, cfg.h_w, d);
}

}  // namespace

void validate(const ControllerConfig& cfg) {
  if (!(cfg.k_v > 0.0) || !(cfg.k_p > 0.0)) {
    throw InvalidInputError("controller gains k_v and k_p must be positive");
  }
  if (!(cfg.h_w > 0.0)) throw InvalidInputError("time headway must be positive");
  if (!(cfg.k_a >= 0.0)) throw InvalidInputError("feed-forward gain k_a must be >= 0");
}

double cacc_control(const VehicleState& own, const VehicleState& pred,
                    std::optional<double> received_accel, const ControllerConfig& cfg,
                    double d) {
  const double ff = received_accel ? cfg.k_a * *received_accel : 0.0;
  return ff + feedback(own, pred, cfg, d);
}

double cacc_control_weighted(const VehicleState& own, const VehicleState& pred,
                             double pred_accel, double weight, const ControllerConfig& cfg,
                             double d) {
  return weight * cfg.k_a * pred_accel + feedback(own, pred, cfg, d);
}

double acc_control(const VehicleState& own, const VehicleState& pred,
                   const ControllerConfig& cfg, double d) {
  return 0.0 + feedback(own, pred, cfg, d);
}

double saturate(double u, const VehicleParams& params) {
  return std::clamp(u, -params.decel_limit, params.accel_limit);
}

double min_headway(double tau, double gamma, double k_a) {
  if (!(tau > 0.0)) throw InvalidInputError("tau must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInputError("gamma must lie in [0, 1]");
  if (!(k_a >= 0.0)) throw InvalidInputError("k_a must be >= 0");
  return 2.0 * tau / (1.0 + gamma * k_a);
}

}  // namespace platoon

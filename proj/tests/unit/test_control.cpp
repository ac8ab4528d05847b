#include <gtest/gtest.h>

#include <random>

#include "platoon/control.hpp"
#include "platoon/errors.hpp"

namespace platoon {
namespace {

ControllerConfig nominal_gains(double h_w = 1.0) {
  ControllerConfig c;
  c.k_a = 0.4;
  c.k_v = 1.0;
  c.k_p = 0.8;
  c.h_w = h_w;
  return c;
}

// Follower placed exactly at the desired spacing behind `pred`.
VehicleState at_equilibrium(const VehicleState& pred, double h_w, double d) {
  return {pred.x - d - h_w * pred.v, pred.v, 0.0};
}

TEST(CaccControl, ZeroAtEquilibrium) {
  const auto cfg = nominal_gains();
  const VehicleState pred{200, 25, 0};
  EXPECT_DOUBLE_EQ(cacc_control(at_equilibrium(pred, cfg.h_w, 5), pred, 0.0, cfg, 5), 0.0);
}

TEST(CaccControl, DroppedPacketLosesFeedForward) {
  const auto cfg = nominal_gains();
  const VehicleState pred{200, 25, -9};
  const auto own = at_equilibrium(pred, cfg.h_w, 5);
  const double got = cacc_control(own, pred, -9.0, cfg, 5);
  const double lost = cacc_control(own, pred, std::nullopt, cfg, 5);
  EXPECT_DOUBLE_EQ(got, 0.4 * -9.0);
  EXPECT_DOUBLE_EQ(lost, 0.0);
}

TEST(CaccControl, VelocityTermAlone) {
  auto cfg = nominal_gains();
  const VehicleState pred{200, 25, 0};
  VehicleState own = at_equilibrium(pred, cfg.h_w, 5);
  own.v -= 1.0;
  own.x += cfg.h_w;  // keep e = 0 with the lower speed
  EXPECT_NEAR(cacc_control(own, pred, 0.0, cfg, 5), 1.0, 1e-12);
}

TEST(AccControl, PositionTermAlone) {
  const auto cfg = nominal_gains();
  const VehicleState pred{200, 25, 0};
  VehicleState own = at_equilibrium(pred, cfg.h_w, 5);
  own.x += 2.0;
  EXPECT_NEAR(acc_control(own, pred, cfg, 5), -1.6, 1e-12);
}

TEST(AccControl, IdenticalToCaccWithDroppedPacket) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-500, 500), v(0, 40), a(-9, 3), g(0.05, 3);
  for (int i = 0; i < 10000; ++i) {
    ControllerConfig cfg{g(rng), g(rng), g(rng), g(rng), ControlMode::kCacc};
    const VehicleState own{x(rng), v(rng), a(rng)}, pred{x(rng), v(rng), a(rng)};
    const double d = 10 * g(rng);
    ASSERT_EQ(acc_control(own, pred, cfg, d), cacc_control(own, pred, std::nullopt, cfg, d));
    ASSERT_EQ(acc_control(own, pred, cfg, d), cacc_control_weighted(own, pred, pred.a, 0.0, cfg, d));
  }
}

TEST(CaccControl, Superposition) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  const auto cfg = nominal_gains(0.9);
  for (int i = 0; i < 1000; ++i) {
    const VehicleState o1{u(rng), u(rng), u(rng)}, p1{u(rng), u(rng), u(rng)};
    const VehicleState o2{u(rng), u(rng), u(rng)}, p2{u(rng), u(rng), u(rng)};
    const VehicleState os{o1.x + o2.x, o1.v + o2.v, o1.a + o2.a};
    const VehicleState ps{p1.x + p2.x, p1.v + p2.v, p1.a + p2.a};
    const double sum = cacc_control(o1, p1, p1.a, cfg, 0) + cacc_control(o2, p2, p2.a, cfg, 0);
    const double joint = cacc_control(os, ps, ps.a, cfg, 0);
    EXPECT_NEAR(joint, sum, 1e-12 * std::max(1.0, std::abs(sum)));
    const double acc_sum = acc_control(o1, p1, cfg, 0) + acc_control(o2, p2, cfg, 0);
    EXPECT_NEAR(acc_control(os, ps, cfg, 0), acc_sum, 1e-12 * std::max(1.0, std::abs(acc_sum)));
  }
}

TEST(Saturate, Clamps) {
  VehicleParams p;
  p.decel_limit = 6;
  p.accel_limit = 3;
  EXPECT_EQ(saturate(-9, p), -6);
  EXPECT_EQ(saturate(-3, p), -3);
  EXPECT_EQ(saturate(4, p), 3);
  EXPECT_EQ(saturate(-std::numeric_limits<double>::infinity(), p), -6);
}

TEST(MinHeadway, ReferenceValues) {
  EXPECT_NEAR(min_headway(0.5, 0.4, 0.4), 0.8621, 1e-4);
  EXPECT_NEAR(min_headway(0.5, 1.0, 0.4), 0.7143, 1e-4);
  EXPECT_EQ(min_headway(0.5, 0.0, 0.4), 1.0);
  for (double k : {0.0, 0.25, 1.0, 7.0}) EXPECT_EQ(min_headway(0.5, 0.0, k), 1.0);
}

TEST(MinHeadway, DecreasesInGammaAndKa) {
  double prev = min_headway(0.5, 0.0, 0.4);
  for (int i = 1; i <= 100; ++i) {
    const double h = min_headway(0.5, i / 100.0, 0.4);
    EXPECT_LT(h, prev);
    prev = h;
  }
  prev = min_headway(0.5, 0.6, 0.0);
  for (int i = 1; i <= 100; ++i) {
    const double h = min_headway(0.5, 0.6, i / 50.0);
    EXPECT_LT(h, prev);
    prev = h;
  }
}

TEST(MinHeadway, RejectsOutOfRange) {
  EXPECT_THROW(min_headway(0.0, 0.5, 0.4), InvalidInputError);
  EXPECT_THROW(min_headway(0.5, 1.5, 0.4), InvalidInputError);
  EXPECT_THROW(min_headway(0.5, 0.5, -1), InvalidInputError);
}

TEST(ControllerValidation, Invariants) {
  EXPECT_NO_THROW(validate(nominal_gains()));
  auto c = nominal_gains();
  c.k_v = 0;
  EXPECT_THROW(validate(c), InvalidInputError);
  c = nominal_gains();
  c.h_w = -1;
  EXPECT_THROW(validate(c), InvalidInputError);
  c = nominal_gains();
  c.k_a = -0.1;
  EXPECT_THROW(validate(c), InvalidInputError);
}

}  // namespace
}  // namespace platoon

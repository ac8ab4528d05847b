#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "platoon/errors.hpp"
#include "platoon/montecarlo.hpp"
#include "platoon/stability.hpp"

namespace platoon {
namespace {

ControllerConfig nominal_gains(double h_w) {
  ControllerConfig c;
  c.k_a = 0.4;
  c.k_v = 1.0;
  c.k_p = 0.8;
  c.h_w = h_w;
  return c;
}

std::complex<double> channel(const Matrix& a, const Vector& b, const RowVector& c, double w) {
  using C = std::complex<double>;
  const Eigen::MatrixXcd m = C(0, w) * Eigen::MatrixXcd::Identity(a.rows(), a.cols()) - a.cast<C>();
  return (c.cast<C>() * m.partialPivLu().solve(b.cast<C>()))(0);
}

// Leader-to-first-follower spacing error from the plain two-vehicle model
// with the leader acceleration as input.
std::complex<double> lead_channel(const ControllerConfig& c, double tau, double gamma, double w) {
  using C = std::complex<double>;
  const C s(0, w);
  // E1 = X1 - X0 + h V1, X0 = W/s^2, V0 = W/s; follower:
  // (tau s + 1) s^2 X1 = g ka W - kv (s X1 - W/s) - kp (X1 - W/s^2 + h s X1)
  const double g = gamma * c.k_a;
  const C lhs = (tau * s + 1.0) * s * s + c.k_v * s + c.k_p + c.k_p * c.h_w * s;
  const C rhs = g + c.k_v / s + c.k_p / (s * s);
  const C x1 = rhs / lhs;
  return x1 - 1.0 / (s * s) + c.h_w * s * x1;
}

TEST(ErrorSystem, CouplingMatchesTransferFunction) {
  for (double gamma : {0.0, 0.4, 1.0}) {
    for (double h : {0.75, 0.9, 1.5}) {
      const auto cfg = nominal_gains(h);
      const auto sys = cacc_error_system(cfg, 0.5, gamma);
      const auto tf = cacc_error_tf(cfg, 0.5, gamma);
      for (double w : {0.01, 0.5, 1.2, 7.0}) {
        EXPECT_LT(std::abs(channel(sys.a0, sys.b, sys.c, w) - evaluate(tf, {0, w})), 1e-12);
        EXPECT_LT(std::abs(channel(sys.a0, sys.d, sys.c, w) - lead_channel(cfg, 0.5, gamma, w)),
                  1e-9 * std::abs(lead_channel(cfg, 0.5, gamma, w)) + 1e-12);
      }
    }
  }
}

TEST(ErrorSystem, RejectsUnstableAndMismatched) {
  ErrorSystem sys = cacc_error_system(nominal_gains(0.9), 0.5, 0.4);
  sys.a0(0, 2) = 1.0;
  EXPECT_THROW(validate(sys), NumericalError);
  sys = cacc_error_system(nominal_gains(0.9), 0.5, 0.4);
  sys.b = Vector::Ones(2);
  EXPECT_THROW(validate(sys), InvalidInputError);
}

TEST(L2Norm, Examples) {
  EXPECT_NEAR(l2_norm_signal(std::vector<double>(400, 1.0), 0.01), 2.0, 0.01);
  EXPECT_EQ(l2_norm_signal(std::vector<double>(50, 0.0), 0.01), 0.0);
  EXPECT_NEAR(l2_norm_signal(std::vector<double>(100, -9.0), 0.01), 9.0, 1e-12);
  EXPECT_THROW(l2_norm_signal(std::vector<double>{1.0}, 0.0), InvalidInputError);
}

TEST(Theorem1Bound, ZeroExcitationGivesZero) {
  const auto sys = cacc_error_system(nominal_gains(0.75), 0.5, 1.0);
  for (auto v : {JStarVariant::kTrace, JStarVariant::kSqrtTrace}) {
    EXPECT_EQ(theorem1_bound(sys, 0.0, std::vector<double>(100, 0.0), 0.01, v).bound, 0.0);
  }
}

TEST(Theorem1Bound, HomogeneousOfDegreeOne) {
  const auto sys = cacc_error_system(nominal_gains(0.9), 0.5, 0.4);
  std::vector<double> w(300);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::sin(0.03 * k) * 4.0;
  std::vector<double> w2 = w;
  for (double& x : w2) x *= 2;
  const auto a = theorem1_bound(sys, 0.7, w, 0.01);
  const auto b = theorem1_bound(sys, 1.4, w2, 0.01);
  EXPECT_NEAR(b.bound, 2 * a.bound, 1e-12 * a.bound);
}

TEST(Theorem1Bound, ComponentsAreConsistent) {
  const auto sys = cacc_error_system(nominal_gains(0.75), 0.5, 1.0);
  const std::vector<double> w(100, -9.0);
  const auto tr = theorem1_bound(sys, 0.3, w, 0.01, JStarVariant::kTrace);
  const auto sq = theorem1_bound(sys, 0.3, w, 0.01, JStarVariant::kSqrtTrace);
  EXPECT_NEAR(sq.j_star, std::sqrt(tr.j_star), 1e-12);
  EXPECT_NEAR(tr.w0_l2, 9.0, 1e-12);
  EXPECT_GE(tr.eta, 1.0);  // ||C|| = 1 at t = 0
  EXPECT_NEAR(tr.gamma2, hinf_norm(StateSpace{sys.a0, sys.d, sys.c, 0.0}).value, 1e-15);
  EXPECT_NEAR(tr.bound, (tr.j_star * tr.beta2 + tr.eta) * 0.3 + tr.j_star * tr.gamma2 * 9.0, 1e-12);
  // Reference values for this configuration.
  EXPECT_NEAR(tr.j_star, 0.6967, 1e-3);
  EXPECT_NEAR(tr.gamma2, 0.2292, 1e-3);
  EXPECT_NEAR(tr.beta2, 0.6142, 1e-3);
  EXPECT_NEAR(tr.eta, 1.0, 1e-6);
}

TEST(Theorem1Bound, DominatesBrakingSimulation) {
  ScenarioConfig sc;
  sc.n_followers = 5;
  sc.initial_speed_mps = 25;
  sc.vehicle.decel_limit = 50;
  sc.vehicle.accel_limit = 50;
  sc.controller = nominal_gains(0.75);
  sc.channel = IdealChannel{};
  sc.leader = LeaderProfile{{{0.0, 0.0, {}}, {10.0, -9.0, 16.0}}};
  sc.duration_s = 60;
  const auto r = run_realization(sc, 0, RunOptions{true});
  std::vector<double> w0;
  for (const auto& row : r.states) w0.push_back(row.front().a);
  double sim = 0;
  for (const auto& e : r.spacing_errors)
    for (double x : e) sim = std::max(sim, std::abs(x));
  const auto sys = cacc_error_system(sc.controller, 0.5, 1.0);
  const auto sq = theorem1_bound(sys, 0.0, w0, sc.dt_s, JStarVariant::kSqrtTrace);
  EXPECT_GT(sim, 0.1);
  EXPECT_LE(sim, sq.bound);
}

}  // namespace
}  // namespace platoon

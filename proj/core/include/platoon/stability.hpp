#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "platoon/control.hpp"
#include "platoon/linalg.hpp"

namespace platoon {

/// Rational transfer function num(s)/den(s); coefficients in ascending
/// powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;
};

/// Throws InvalidInputError for empty/non-finite coefficients, a zero
/// leading denominator coefficient, or an improper function.
void validate(const TransferFunction& tf);

std::complex<double> evaluate(const TransferFunction& tf, std::complex<double> s);

/// True when every root of the denominator lies in the open left half-plane.
bool is_stable(const TransferFunction& tf);

/// Spacing-error propagation e_i = H(s) e_{i-1} for the constant-headway
/// law with the feed-forward gain scaled by the mean reception gamma:
///
///   H(s) = (g k_a s^2 + k_v s + k_p) / (tau s^3 + s^2 + (k_v + k_p h_w) s + k_p)
///
/// with g = gamma in CACC mode and g = 0 in ACC mode. H(0) = 1.
/// Throws NumericalError(kUnstableLoop) if the denominator is not Hurwitz.
TransferFunction cacc_error_tf(const ControllerConfig& cfg, double tau, double gamma);

/// |H(j omega)|. Throws NumericalError(kPoleOnAxis) on a pole at j omega.
double freq_response_mag(const TransferFunction& tf, double omega);

struct FrequencyGrid {
  double omega_min = 1e-3;
  double omega_max = 1e3;
  int points = 2000;
};

struct HinfResult {
  double value = 0.0;
  double peak_omega = 0.0;     ///< rad/s; 0 for a DC peak, inf for a high-frequency limit
  FrequencyGrid grid;
  double refine_tolerance = 0.0;  ///< final golden-section bracket width in log10(omega)
};

/// Peak gain over a log grid (plus DC and the high-frequency limit) with
/// golden-section refinement around the best grid point.
/// Throws NumericalError(kUnstableLoop) for an unstable transfer function.
HinfResult hinf_norm(const TransferFunction& tf, const FrequencyGrid& grid = {});

/// SISO state-space model y = C x + d u, x' = A x + B u.
struct StateSpace {
  Matrix a;
  Vector b;
  RowVector c;
  double d = 0.0;
};

/// Controllable canonical realization of a proper transfer function.
StateSpace realize(const TransferFunction& tf);

std::complex<double> evaluate(const StateSpace& ss, double omega);

HinfResult hinf_norm(const StateSpace& ss, const FrequencyGrid& grid = {});

struct ImpulseL1Result {
  double value = 0.0;        ///< |d| + integral over [0, horizon] of |h(t)|
  double tail_bound = 0.0;   ///< rigorous upper bound on the integral beyond horizon
  double horizon = 0.0;
  double dt = 0.0;
  bool insufficient_horizon = false;  ///< tail_bound > 1% of value
};

/// L1 norm of the impulse response from an exact sampled simulation and the
/// trapezoid rule (with linear interpolation across sign changes).
ImpulseL1Result impulse_l1(const TransferFunction& tf, double horizon, double dt);

/// Solves A P + P A^T + Q = 0 for symmetric P. Throws
/// NumericalError(kNoUniqueSolution) when A is not Hurwitz and
/// NumericalError(kResidual) if the residual exceeds 1e-9 ||Q||.
Matrix lyapunov_solve(const Matrix& a, const Matrix& q);

/// Per-vehicle error-propagation realization
///   z_1' = A0 z_1 + D w0,  z_i' = A0 z_i + B y_{i-1},  y_i = C z_i
/// where y_i is the spacing error of follower i and w0 the leader
/// acceleration.
struct ErrorSystem {
  Matrix a0;
  Vector b;
  RowVector c;
  Vector d;
};

/// Throws InvalidInputError on inconsistent dimensions and
/// NumericalError(kUnstableLoop) if A0 is not Hurwitz.
void validate(const ErrorSystem& sys);

/// Observer-canonical realization of the homogeneous string with output the
/// spacing error. C (sI - A0)^{-1} B equals cacc_error_tf; the lead channel
/// is e_1 / w0 = ((g k_a h_w - tau) s + (g k_a + k_v h_w - 1)) / den(s).
ErrorSystem cacc_error_system(const ControllerConfig& cfg, double tau, double gamma);

/// How the L2 -> Linf gain enters the bound: `kTrace` uses trace(C P C^T)
/// as written for the bound, `kSqrtTrace` its square root (the induced
/// L2 -> Linf gain of a strictly proper system).
enum class JStarVariant { kTrace, kSqrtTrace };

struct BoundReport {
  JStarVariant variant = JStarVariant::kTrace;
  double j_star = 0.0;
  double beta2 = 0.0;
  double gamma2 = 0.0;
  double eta = 0.0;
  double alpha_star = 0.0;
  double w0_l2 = 0.0;
  double bound = 0.0;

  double m1() const { return j_star * beta2 + eta; }
  double m2() const { return j_star * gamma2; }
};

/// Uniform worst-case spacing-error bound (J* beta2 + eta) alpha* + J* gamma2 ||w0||_2.
BoundReport theorem1_bound(const ErrorSystem& sys, double alpha_star,
                           std::span<const double> w0, double dt,
                           JStarVariant variant = JStarVariant::kTrace);

/// sqrt(sum s^2 dt).
double l2_norm_signal(std::span<const double> samples, double dt);

struct StabilityReport {
  bool stable = false;
  double hinf = 0.0;
  double peak_omega = 0.0;
  double margin = 0.0;   ///< 1 - ||H||inf
  double h_min = 0.0;    ///< min_headway for the same (tau, gamma, k_a)
};

inline constexpr double kStringStabilityTolerance = 1e-6;

StabilityReport is_string_stable(const ControllerConfig& cfg, double tau, double gamma);

/// CSV `omega_rad_s,magnitude` over the grid.
void write_frequency_response_csv(std::ostream& os, const TransferFunction& tf,
                                  const FrequencyGrid& grid = {});

}  // namespace platoon

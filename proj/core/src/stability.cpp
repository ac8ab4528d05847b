#include "platoon/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "platoon/csv.hpp"
#include "platoon/errors.hpp"

namespace platoon {
namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Index of the highest nonzero coefficient; -1 for the zero polynomial.
int degree(const std::vector<double>& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k) {
    if (p[static_cast<std::size_t>(k)] != 0.0) return k;
  }
  return -1;
}

Complex horner(const std::vector<double>& p, Complex s) {
  Complex acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double omega_at(const FrequencyGrid& grid, int k) {
  const double lo = std::log10(grid.omega_min);
  const double hi = std::log10(grid.omega_max);
  return std::pow(10.0, lo + (hi - lo) * k / (grid.points - 1));
}

void check_grid(const FrequencyGrid& grid) {
  if (!(grid.omega_min > 0.0) || !(grid.omega_max > grid.omega_min) || grid.points < 3) {
    throw InvalidInputError("frequency grid needs 0 < omega_min < omega_max and >= 3 points");
  }
}

HinfResult peak_gain(const std::function<double(double)>& mag, double high_freq_limit,
                     const FrequencyGrid& grid) {
  check_grid(grid);
  HinfResult out;
  out.grid = grid;

  int best = 0;
  double best_mag = -1.0;
  for (int k = 0; k < grid.points; ++k) {
    const double m = mag(omega_at(grid, k));
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }

  // Golden-section search on log10(omega) over the neighbouring cells.
  const double step = (std::log10(grid.omega_max) - std::log10(grid.omega_min)) / (grid.points - 1);
  const double center = std::log10(omega_at(grid, best));
  double lo = std::max(center - step, std::log10(grid.omega_min));
  double hi = std::min(center + step, std::log10(grid.omega_max));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = mag(std::pow(10.0, x1));
  double f2 = mag(std::pow(10.0, x2));
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = mag(std::pow(10.0, x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = mag(std::pow(10.0, x1));
    }
  }
  out.refine_tolerance = hi - lo;
  out.value = best_mag;
  out.peak_omega = omega_at(grid, best);
  const double refined = std::max(f1, f2);
  if (refined > out.value) {
    out.value = refined;
    out.peak_omega = std::pow(10.0, f1 >= f2 ? x1 : x2);
  }

  const double dc = mag(0.0);
  if (dc >= out.value) {
    out.value = dc;
    out.peak_omega = 0.0;
  }
  if (high_freq_limit > out.value) {
    out.value = high_freq_limit;
    out.peak_omega = std::numeric_limits<double>::infinity();
  }
  return out;
}

Matrix companion(const std::vector<double>& den) {
  const int n = degree(den);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) a(n - 1, k) = -den[static_cast<std::size_t>(k)] / den[static_cast<std::size_t>(n)];
  return a;
}

bool symmetric(const Matrix& q) {
  const double scale = std::max(q.cwiseAbs().maxCoeff(), 1.0);
  return (q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

}  // namespace

void validate(const TransferFunction& tf) {
  if (tf.num.empty() || tf.den.empty()) throw InvalidInputError("transfer function has no coefficients");
  for (double c : tf.num) {
    if (!std::isfinite(c)) throw InvalidInputError("non-finite numerator coefficient");
  }
  for (double c : tf.den) {
    if (!std::isfinite(c)) throw InvalidInputError("non-finite denominator coefficient");
  }
  if (tf.den.back() == 0.0) throw InvalidInputError("leading denominator coefficient is zero");
  if (degree(tf.num) > degree(tf.den)) throw InvalidInputError("transfer function is improper");
}

std::complex<double> evaluate(const TransferFunction& tf, std::complex<double> s) {
  return horner(tf.num, s) / horner(tf.den, s);
}

bool is_stable(const TransferFunction& tf) {
  validate(tf);
  if (degree(tf.den) == 0) return true;
  return is_hurwitz(companion(tf.den));
}

TransferFunction cacc_error_tf(const ControllerConfig& cfg, double tau, double gamma) {
  validate(cfg);
  if (!(tau > 0.0)) throw InvalidInputError("tau must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInputError("gamma must lie in [0, 1]");
  const double g = cfg.mode == ControlMode::kCacc ? gamma * cfg.k_a : 0.0;
  TransferFunction tf{{cfg.k_p, cfg.k_v, g}, {cfg.k_p, cfg.k_v + cfg.k_p * cfg.h_w, 1.0, tau}};
  if (!is_stable(tf)) {
    throw NumericalError(NumericalError::Kind::kUnstableLoop,
                         "vehicle-following loop is unstable for these gains");
  }
  return tf;
}

double freq_response_mag(const TransferFunction& tf, double omega) {
  validate(tf);
  if (!(omega >= 0.0)) throw InvalidInputError("omega must be >= 0");
  const Complex s(0.0, omega);
  const Complex den = horner(tf.den, s);
  double scale = 0.0;
  double w = 1.0;
  for (double c : tf.den) {
    scale += std::abs(c) * w;
    w *= omega;
  }
  if (std::abs(den) <= 1e-13 * scale) {
    throw NumericalError(NumericalError::Kind::kPoleOnAxis,
                         "transfer function has a pole on the imaginary axis");
  }
  return std::abs(horner(tf.num, s) / den);
}

HinfResult hinf_norm(const TransferFunction& tf, const FrequencyGrid& grid) {
  if (!is_stable(tf)) {
    throw NumericalError(NumericalError::Kind::kUnstableLoop, "H-infinity norm of an unstable system");
  }
  const int dn = degree(tf.den);
  const double hf = degree(tf.num) == dn
                        ? std::abs(tf.num[static_cast<std::size_t>(dn)] / tf.den[static_cast<std::size_t>(dn)])
                        : 0.0;
  return peak_gain([&](double w) { return freq_response_mag(tf, w); }, hf, grid);
}

StateSpace realize(const TransferFunction& tf) {
  validate(tf);
  const int n = degree(tf.den);
  const double lead = tf.den[static_cast<std::size_t>(n)];
  std::vector<double> num(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t k = 0; k < tf.num.size() && k < num.size(); ++k) num[k] = tf.num[k] / lead;

  StateSpace ss;
  ss.d = num[static_cast<std::size_t>(n)];
  ss.a = companion(tf.den);
  ss.b = Vector::Zero(n);
  ss.c = RowVector::Zero(n);
  if (n > 0) ss.b(n - 1) = 1.0;
  for (int k = 0; k < n; ++k) {
    ss.c(k) = num[static_cast<std::size_t>(k)] - ss.d * tf.den[static_cast<std::size_t>(k)] / lead;
  }
  return ss;
}

std::complex<double> evaluate(const StateSpace& ss, double omega) {
  const Eigen::Index n = ss.a.rows();
  if (n == 0) return ss.d;
  ComplexMatrix m = ComplexMatrix::Identity(n, n) * Complex(0.0, omega) - ss.a.cast<Complex>();
  const Eigen::VectorXcd x = m.partialPivLu().solve(ss.b.cast<Complex>());
  return (ss.c.cast<Complex>() * x)(0) + ss.d;
}

HinfResult hinf_norm(const StateSpace& ss, const FrequencyGrid& grid) {
  if (!is_hurwitz(ss.a)) {
    throw NumericalError(NumericalError::Kind::kUnstableLoop, "H-infinity norm of an unstable system");
  }
  return peak_gain([&](double w) { return std::abs(evaluate(ss, w)); }, std::abs(ss.d), grid);
}

ImpulseL1Result impulse_l1(const TransferFunction& tf, double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > dt)) throw InvalidInputError("impulse_l1 needs 0 < dt < horizon");
  if (!is_stable(tf)) {
    throw NumericalError(NumericalError::Kind::kUnstableLoop, "impulse L1 norm of an unstable system");
  }
  const StateSpace ss = realize(tf);
  ImpulseL1Result out;
  out.dt = dt;
  const Eigen::Index n = ss.a.rows();
  if (n == 0) {
    out.value = std::abs(ss.d);
    out.horizon = horizon;
    return out;
  }

  const auto steps = static_cast<long>(std::ceil(horizon / dt));
  out.horizon = static_cast<double>(steps) * dt;
  const Matrix phi = expm(ss.a, dt);
  Vector x = ss.b;
  double h0 = ss.c.dot(x);
  double area = 0.0;
  for (long k = 0; k < steps; ++k) {
    x = phi * x;
    const double h1 = ss.c.dot(x);
    if ((h0 > 0.0 && h1 < 0.0) || (h0 < 0.0 && h1 > 0.0)) {
      area += 0.5 * dt * (h0 * h0 + h1 * h1) / (std::abs(h0) + std::abs(h1));
    } else {
      area += 0.5 * dt * (std::abs(h0) + std::abs(h1));
    }
    h0 = h1;
  }
  out.value = std::abs(ss.d) + area;

  // Tail: int_T^inf |C e^{As} x_T| ds <= sqrt(x_T' W x_T / (2 eps)) with W the
  // observability Gramian of the eps-shifted system.
  const double eps = -0.5 * spectral_abscissa(ss.a);
  const Matrix shifted = ss.a + eps * Matrix::Identity(n, n);
  const Matrix w = lyapunov_solve(shifted.transpose(), ss.c.transpose() * ss.c);
  out.tail_bound = std::sqrt(std::max(0.0, x.dot(w * x)) / (2.0 * eps));
  out.insufficient_horizon = out.tail_bound > 0.01 * out.value;
  return out;
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw InvalidInputError("lyapunov_solve: A and Q must be square and the same size");
  }
  if (!a.allFinite() || !q.allFinite()) throw InvalidInputError("lyapunov_solve: non-finite input");
  if (!symmetric(q)) throw InvalidInputError("lyapunov_solve: Q must be symmetric");
  if (!is_hurwitz(a)) {
    throw NumericalError(NumericalError::Kind::kNoUniqueSolution,
                         "Lyapunov equation needs a Hurwitz matrix for a unique solution");
  }

  const Matrix eye = Matrix::Identity(n, n);
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // vec(A P) = (I kron A) vec(P), vec(P A^T) = (A kron I) vec(P)
      k.block(i * n, j * n, n, n) += eye(i, j) * a + a(i, j) * eye;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Eigen::PartialPivLU<Matrix> lu(k);
  Vector p = lu.solve(rhs);
  p += lu.solve(rhs - k * p);

  Matrix sol = Eigen::Map<Matrix>(p.data(), n, n);
  sol = 0.5 * (sol + sol.transpose()).eval();

  const double residual = (a * sol + sol * a.transpose() + q).norm();
  const double scale = q.norm();
  if (residual > 1e-9 * std::max(scale, std::numeric_limits<double>::min())) {
    if (scale == 0.0 && residual == 0.0) return sol;
    throw NumericalError(NumericalError::Kind::kResidual, "Lyapunov residual above tolerance");
  }
  return sol;
}

void validate(const ErrorSystem& sys) {
  const Eigen::Index n = sys.a0.rows();
  if (sys.a0.cols() != n || sys.b.size() != n || sys.c.size() != n || sys.d.size() != n || n == 0) {
    throw InvalidInputError("error system matrices have inconsistent dimensions");
  }
  if (!is_hurwitz(sys.a0)) {
    throw NumericalError(NumericalError::Kind::kUnstableLoop, "error system matrix A0 is not Hurwitz");
  }
}

ErrorSystem cacc_error_system(const ControllerConfig& cfg, double tau, double gamma) {
  const TransferFunction tf = cacc_error_tf(cfg, tau, gamma);
  const double g = tf.num[2];
  ErrorSystem sys;
  sys.a0 = Matrix::Zero(3, 3);
  sys.a0(1, 0) = 1.0;
  sys.a0(2, 1) = 1.0;
  sys.a0(0, 2) = -tf.den[0] / tau;
  sys.a0(1, 2) = -tf.den[1] / tau;
  sys.a0(2, 2) = -tf.den[2] / tau;
  sys.b = Vector(3);
  sys.b << cfg.k_p / tau, cfg.k_v / tau, g / tau;
  sys.c = RowVector::Zero(3);
  sys.c(2) = 1.0;
  sys.d = Vector(3);
  sys.d << (g + cfg.k_v * cfg.h_w - 1.0) / tau, (g * cfg.h_w - tau) / tau, 0.0;
  return sys;
}

BoundReport theorem1_bound(const ErrorSystem& sys, double alpha_star, std::span<const double> w0,
                           double dt, JStarVariant variant) {
  validate(sys);
  if (!(alpha_star >= 0.0)) throw InvalidInputError("alpha_star must be >= 0");

  BoundReport r;
  r.variant = variant;
  r.alpha_star = alpha_star;

  const Matrix p = lyapunov_solve(sys.a0, sys.b * sys.b.transpose());
  const double trace = (sys.c * p * sys.c.transpose())(0, 0);
  r.j_star = variant == JStarVariant::kTrace ? trace : std::sqrt(std::max(trace, 0.0));

  const Matrix wo = lyapunov_solve(sys.a0.transpose(), sys.c.transpose() * sys.c);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(wo, Eigen::EigenvaluesOnly);
  r.beta2 = std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));

  r.gamma2 = hinf_norm(StateSpace{sys.a0, sys.d, sys.c, 0.0}).value;

  // sup_t ||C e^{A0 t}|| over [0, 40 T], T the slowest time constant; the
  // grid is refined once and the larger value kept.
  const double t_end = 40.0 / (-spectral_abscissa(sys.a0));
  auto sup_on_grid = [&](int points) {
    const Matrix phi = expm(sys.a0, t_end / points);
    RowVector row = sys.c;
    double best = row.norm();
    for (int k = 0; k < points; ++k) {
      row = row * phi;
      best = std::max(best, row.norm());
    }
    return best;
  };
  r.eta = std::max(sup_on_grid(4000), sup_on_grid(8000));

  r.w0_l2 = l2_norm_signal(w0, dt);
  r.bound = r.m1() * alpha_star + r.m2() * r.w0_l2;
  return r;
}

double l2_norm_signal(std::span<const double> samples, double dt) {
  if (!(dt > 0.0)) throw InvalidInputError("dt must be positive");
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc * dt);
}

StabilityReport is_string_stable(const ControllerConfig& cfg, double tau, double gamma) {
  const HinfResult h = hinf_norm(cacc_error_tf(cfg, tau, gamma));
  StabilityReport r;
  r.hinf = h.value;
  r.peak_omega = h.peak_omega;
  r.margin = 1.0 - h.value;
  r.stable = h.value <= 1.0 + kStringStabilityTolerance;
  r.h_min = min_headway(tau, gamma, cfg.mode == ControlMode::kCacc ? cfg.k_a : 0.0);
  return r;
}

void write_frequency_response_csv(std::ostream& os, const TransferFunction& tf,
                                  const FrequencyGrid& grid) {
  check_grid(grid);
  os << "omega_rad_s,magnitude\n";
  for (int k = 0; k < grid.points; ++k) {
    const double w = omega_at(grid, k);
    os << format_sci(w) << ',' << format_sci(freq_response_mag(tf, w)) << '\n';
  }
}

}  // namespace platoon

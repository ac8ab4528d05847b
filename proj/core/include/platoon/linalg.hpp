#pragma once

#include <Eigen/Core>

namespace platoon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Largest real part over the eigenvalues of a square matrix.
double spectral_abscissa(const Matrix& a);

inline bool is_hurwitz(const Matrix& a) { return spectral_abscissa(a) < 0.0; }

/// Matrix exponential e^{A t}.
Matrix expm(const Matrix& a, double t);

/// Exact zero-order-hold discretization of x' = A x + B u over dt:
/// returns {e^{A dt}, integral_0^dt e^{A s} ds B} from one augmented
/// exponential.
std::pair<Matrix, Matrix> zoh_discretize(const Matrix& a, const Matrix& b, double dt);

}  // namespace platoon

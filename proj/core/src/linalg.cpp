#include "platoon/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "platoon/errors.hpp"

namespace platoon {

double spectral_abscissa(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInputError("spectral abscissa needs a square matrix");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

Matrix expm(const Matrix& a, double t) {
  const Matrix scaled = a * t;
  return scaled.exp();
}

std::pair<Matrix, Matrix> zoh_discretize(const Matrix& a, const Matrix& b, double dt) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a;
  aug.topRightCorner(n, m) = b;
  const Matrix e = expm(aug, dt);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace platoon

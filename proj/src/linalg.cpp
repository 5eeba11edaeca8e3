#include "synth/linalg.hpp"

#include <cmath>
#include <string>

namespace synth {

Matrix solve_ridge(const Matrix& A, const Matrix& B, double lambda) {
  if (A.rows() != B.rows()) {
    throw ShapeError("solve_ridge", "row mismatch: A has " + std::to_string(A.rows()) +
                                        " rows, B has " + std::to_string(B.rows()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("solve_ridge", "lambda must be finite and non-negative");
  }
  Matrix normal = A.transpose() * A;
  normal.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(normal);
  const bool singular = llt.info() != Eigen::Success || (lambda == 0.0 && A.cols() > 0 && llt.rcond() < 1e-13);
  if (singular) {
    throw NumericError("solve_ridge",
                       "normal matrix is singular or numerically rank deficient; use a positive ridge");
  }
  return llt.solve(A.transpose() * B);
}

double normal_matrix_scale(const Matrix& A) {
  if (A.cols() == 0) return 0.0;
  return A.squaredNorm() / static_cast<double>(A.cols());
}

Matrix psd_factor(const Matrix& sigma, double floor) {
  const Index d = sigma.rows();
  if (sigma.cols() != d) throw ShapeError("psd_factor", "covariance must be square");
  if (!sigma.allFinite()) throw NumericError("psd_factor", "covariance has non-finite entries");
  const double scale = sigma.cwiseAbs().maxCoeff();
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300)) {
    throw NumericError("psd_factor", "covariance is not symmetric");
  }
  if (floor < 0.0) throw ConfigError("psd_factor", "floor must be non-negative");

  Matrix shifted = sigma;
  shifted.diagonal().array() += floor;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() == Eigen::Success) {
    Matrix lower = llt.matrixL();
    return lower;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.info() != Eigen::Success) {
    throw NumericError("psd_factor", "eigendecomposition of covariance failed");
  }
  const Vector& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  if (values.minCoeff() < -1e-8 * largest) {
    throw NumericError("psd_factor", "covariance has a negative eigenvalue beyond rounding error");
  }
  Vector root(d);
  for (Index i = 0; i < d; ++i) root(i) = std::sqrt(std::max(values(i), 0.0) + floor);
  return eig.eigenvectors() * root.asDiagonal();
}

Matrix covariance(const Matrix& rows, bool unbiased) {
  const Index n = rows.rows();
  if (n == 0) return Matrix::Zero(rows.cols(), rows.cols());
  const RowVector mean = rows.colwise().mean();
  const Matrix centered = rows.rowwise() - mean;
  const double denom = unbiased ? static_cast<double>(std::max<Index>(n - 1, 1)) : static_cast<double>(n);
  return (centered.transpose() * centered) / denom;
}

}  // namespace synth

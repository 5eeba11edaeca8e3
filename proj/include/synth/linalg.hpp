#pragma once

#include "synth/types.hpp"

namespace synth {

/// argmin_X ||A X - B||_F^2 + lambda ||X||_F^2, solved through a Cholesky
/// factorization of the normal matrix A^T A + lambda I.
/// Throws NumericError when lambda == 0 and A^T A is singular.
Matrix solve_ridge(const Matrix& A, const Matrix& B, double lambda);

/// Mean of the diagonal of A^T A, the scale the relative ridge multiplies.
double normal_matrix_scale(const Matrix& A);

/// Factor F with F F^T = sigma + floor I, for drawing multivariate normals.
///
/// Cholesky is tried first; if it fails the matrix is eigendecomposed and
/// eigenvalues below `floor` are clipped up to it. A non-finite or
/// asymmetric input, or a negative eigenvalue too large to be rounding
/// noise, throws NumericError.
Matrix psd_factor(const Matrix& sigma, double floor);

/// Maximum-likelihood (divide by n) or sample (divide by n - 1) covariance of rows.
Matrix covariance(const Matrix& rows, bool unbiased);

}  // namespace synth

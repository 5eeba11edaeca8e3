#pragma once

#include "synth/types.hpp"

#include <cstdint>
#include <vector>

namespace synth {

/// Ridge-regularized linear model in original feature units.
struct LinearRegressor {
  Vector weights;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> cv_mad;  // per grid entry; +inf where the solve failed

  Vector predict(const Matrix& x) const;
};

/// Lambdas for the standardized design (columns centered, unit variance).
std::vector<double> default_lambda_grid();

/// Picks lambda by k-fold cross-validated MAD, then refits on all rows.
/// Scores within one fold standard error of the best are ties; the larger lambda wins.
LinearRegressor fit_linear_regressor(const Matrix& x, const Vector& y,
                                     const std::vector<double>& lambda_grid, int folds,
                                     std::uint64_t seed);

/// Single fit at a fixed lambda, no cross-validation.
LinearRegressor fit_ridge_regressor(const Matrix& x, const Vector& y, double lambda);

}  // namespace synth

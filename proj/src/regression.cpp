#include "synth/regression.hpp"

#include "synth/linalg.hpp"
#include "synth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace synth {

Vector LinearRegressor::predict(const Matrix& x) const {
  if (x.cols() != weights.size()) throw ShapeError("predict", "feature count does not match the regressor");
  return (x * weights).array() + intercept;
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4}; }

LinearRegressor fit_ridge_regressor(const Matrix& x, const Vector& y, double lambda) {
  if (x.rows() != y.size()) throw ShapeError("fit_linear_regressor", "rows of X and length of y differ");
  if (x.rows() < 1) throw ConfigError("fit_linear_regressor", "no training rows");
  const Index n = x.rows();
  const RowVector mean = x.colwise().mean();
  RowVector scale = RowVector::Ones(x.cols());
  if (n > 1) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double sd = std::sqrt((x.col(j).array() - mean(j)).square().sum() / static_cast<double>(n - 1));
      if (sd > 0.0) scale(j) = sd;
    }
  }
  const Matrix z = (x.rowwise() - mean).array().rowwise() / scale.array();
  const double y_mean = y.mean();
  const Vector yc = y.array() - y_mean;

  LinearRegressor reg;
  reg.lambda = lambda;
  reg.weights = solve_ridge(z, yc, lambda).col(0).array() / scale.transpose().array();
  reg.intercept = y_mean - mean.dot(reg.weights.transpose());
  return reg;
}

LinearRegressor fit_linear_regressor(const Matrix& x, const Vector& y, const std::vector<double>& lambda_grid,
                                     int folds, std::uint64_t seed) {
  if (lambda_grid.empty()) throw ConfigError("fit_linear_regressor", "lambda grid is empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("fit_linear_regressor", "lambda values must be finite and non-negative");
  }
  if (folds < 2) throw ConfigError("fit_linear_regressor", "need at least 2 folds");
  if (x.rows() != y.size()) throw ShapeError("fit_linear_regressor", "rows of X and length of y differ");
  const Index n = x.rows();
  if (n < folds) throw ConfigError("fit_linear_regressor", "fewer rows than folds");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Index pos = 0; pos < n; ++pos) {
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = static_cast<int>(pos * folds / n);
  }

  // Per-fold mean absolute error; a lambda whose solve fails anywhere scores +inf.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cv(lambda_grid.size(), 0.0);
  std::vector<std::vector<double>> fold_mad(lambda_grid.size());
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    const Matrix x_train = x(train, Eigen::all);
    const Vector y_train = y(train);
    const Matrix x_test = x(test, Eigen::all);
    const Vector y_test = y(test);
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
      if (!std::isfinite(cv[l])) continue;
      try {
        const LinearRegressor reg = fit_ridge_regressor(x_train, y_train, lambda_grid[l]);
        const double abs_err = (reg.predict(x_test) - y_test).cwiseAbs().sum();
        cv[l] += abs_err;
        fold_mad[l].push_back(abs_err / static_cast<double>(test.size()));
      } catch (const NumericError&) {
        cv[l] = inf;
      }
    }
  }

  std::size_t best = lambda_grid.size();
  for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
    cv[l] /= static_cast<double>(n);
    if (std::isfinite(cv[l]) && (best == lambda_grid.size() || cv[l] < cv[best])) best = l;
  }
  if (best == lambda_grid.size()) {
    throw NumericError("fit_linear_regressor", "every lambda in the grid gave a singular system");
  }
  // One-standard-error rule: the largest lambda whose CV MAD is within one
  // fold standard error of the minimum counts as tied with it.
  const auto& fm = fold_mad[best];
  const double fold_mean = std::accumulate(fm.begin(), fm.end(), 0.0) / static_cast<double>(fm.size());
  double ss = 0.0;
  for (double v : fm) ss += (v - fold_mean) * (v - fold_mean);
  const double se = std::sqrt(ss / static_cast<double>(fm.size() - 1) / static_cast<double>(fm.size()));
  const double bound = cv[best] + se + 1e-12 * std::abs(cv[best]);
  for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
    if (cv[l] <= bound && lambda_grid[l] > lambda_grid[best]) best = l;
  }
  LinearRegressor reg = fit_ridge_regressor(x, y, lambda_grid[best]);
  reg.cv_mad = std::move(cv);
  return reg;
}

}  // namespace synth

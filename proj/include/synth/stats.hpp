#pragma once

#include "synth/types.hpp"

#include <span>

namespace synth {

double mad(std::span<const double> predicted, std::span<const double> actual);

/// Sample Pearson correlation. Returns 0 when exactly one input is constant;
/// throws DataError when both are.
double pearson(std::span<const double> x, std::span<const double> y);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double log10_p = 0.0;  // exact even when p underflows
};

/// Two-sided Welch unequal-variance t-test.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Welch t and Satterthwaite df from summary statistics (sample variances).
TTestResult welch_from_moments(double mean_a, double var_a, double n_a, double mean_b,
                               double var_b, double n_b);

/// Natural log of the regularized incomplete beta I_x(a, b).
double log_incomplete_beta(double x, double a, double b);
double incomplete_beta(double x, double a, double b);

/// ln P(|T| >= |t|) for Student t with df degrees of freedom.
double log_t_two_sided_p(double t, double df);

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace synth

#include "synth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace synth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_len, const char* op) {
  if (x.size() != y.size()) {
    throw ShapeError(op, "length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < min_len) throw ConfigError(op, "need at least " + std::to_string(min_len) + " values");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericError("incomplete_beta", "continued fraction did not converge");
}

// log I_x(a, b) with y = 1 - x supplied separately to keep precision near x = 1.
double log_ibeta(double x, double y, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("incomplete_beta", "a and b must be positive");
  if (x <= 0.0) return -kInf;
  if (y <= 0.0) return 0.0;
  const double log_front = a * std::log(x) + b * std::log(y) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_front + std::log(beta_continued_fraction(x, a, b)) - std::log(a);
  }
  const double complement = std::exp(log_front + std::log(beta_continued_fraction(y, b, a)) - std::log(b));
  return std::log1p(-complement);
}

}  // namespace

double mad(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, 1, "mad");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(predicted[i] - actual[i]);
  return s / static_cast<double>(predicted.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2, "pearson");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 && syy == 0.0) throw DataError("pearson", "both inputs are constant; correlation undefined");
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double log_incomplete_beta(double x, double a, double b) { return log_ibeta(x, 1.0 - x, a, b); }

double incomplete_beta(double x, double a, double b) { return std::exp(log_incomplete_beta(x, a, b)); }

double log_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("t_test", "degrees of freedom must be positive");
  if (std::isinf(t)) return -kInf;
  const double t2 = t * t;
  return log_ibeta(df / (df + t2), t2 / (df + t2), 0.5 * df, 0.5);
}

TTestResult welch_from_moments(double mean_a, double var_a, double n_a, double mean_b, double var_b, double n_b) {
  TTestResult r;
  const double sa = var_a / n_a;
  const double sb = var_b / n_b;
  const double se2 = sa + sb;
  if (se2 == 0.0) {
    r.df = n_a + n_b - 2.0;
    if (mean_a == mean_b) return r;  // t = 0, p = 1
    r.t = mean_a > mean_b ? kInf : -kInf;
    r.p = 0.0;
    r.log10_p = -kInf;
    return r;
  }
  r.t = (mean_a - mean_b) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (n_a - 1.0) + sb * sb / (n_b - 1.0));
  const double log_p = log_t_two_sided_p(r.t, r.df);
  r.p = std::clamp(std::exp(log_p), 0.0, 1.0);
  r.log10_p = log_p / std::numbers::ln10;
  return r;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ConfigError("welch_t_test", "each sample needs at least 2 values");
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  return welch_from_moments(ma, sample_variance(a, ma), static_cast<double>(a.size()), mb,
                            sample_variance(b, mb), static_cast<double>(b.size()));
}

}  // namespace synth

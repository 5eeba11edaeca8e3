#include "synth/stats.hpp"

#include "synth/rng.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace synth;

namespace {

using V = std::vector<double>;

// Two-sided Student-t p-value via Boost's regularized incomplete beta.
double boost_t_p(double t, double df) { return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t)); }

}  // namespace

TEST_CASE("mad") {
  CHECK(mad(V{1, 2, 3}, V{1, 2, 3}) == 0.0);
  CHECK(mad(V{1, 2, 3}, V{2, 4, 1.5}) == doctest::Approx(1.5));
  Rng rng(3);
  std::normal_distribution<double> n01;
  V a(37), b(37);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = n01(rng), b[i] = n01(rng);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  CHECK(mad(a, b) == doctest::Approx(sum / 37.0).epsilon(1e-14));
  CHECK_THROWS_AS(mad(V{1}, V{1, 2}), ShapeError);
  CHECK_THROWS(mad(V{}, V{}));
}

TEST_CASE("pearson") {
  CHECK(pearson(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(V{1, 2, 3}, V{3, 2, 1}) == doctest::Approx(-1.0));
  // By hand: deviations (-1,0,1) and (-4/3,-1/3,5/3); sxy = 3, sxx = 2, syy = 14/3.
  CHECK(pearson(V{1, 2, 3}, V{1, 2, 4}) == doctest::Approx(3.0 / std::sqrt(2.0 * 14.0 / 3.0)).epsilon(1e-14));
  CHECK(pearson(V{1, 2, 3}, V{1, 2, 4}) == doctest::Approx(0.98198).epsilon(1e-5));
  CHECK(pearson(V{1, 2, 3}, V{5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(pearson(V{1, 1, 1}, V{5, 5, 5}), DataError);
}

TEST_CASE("welch hand example") {
  const auto r = welch_t_test(V{1, 2, 3}, V{4, 5, 6});
  CHECK(r.t == doctest::Approx(-3.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(-3.6742).epsilon(1e-4));
  CHECK(r.df == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(boost_t_p(r.t, 4.0)).epsilon(1e-10));
  CHECK(std::fabs(r.p - 0.02131) < 1e-4);
  CHECK(r.log10_p == doctest::Approx(std::log10(r.p)).epsilon(1e-12));
}

TEST_CASE("welch unequal sizes and variances against a boost oracle") {
  const V a{0.3, 1.9, -0.4, 2.2, 0.8, 1.1, 3.0};
  const V b{5.1, 4.9, 5.3, 5.0};
  const auto r = welch_t_test(a, b);
  double ma = 0, mb = 0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  ma /= 7, mb /= 4;
  double va = 0, vb = 0;
  for (double x : a) va += (x - ma) * (x - ma);
  for (double x : b) vb += (x - mb) * (x - mb);
  va /= 6, vb /= 3;
  const double se2 = va / 7 + vb / 4;
  const double df = se2 * se2 / ((va / 7) * (va / 7) / 6 + (vb / 4) * (vb / 4) / 3);
  CHECK(r.t == doctest::Approx((ma - mb) / std::sqrt(se2)).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(df).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(boost_t_p(r.t, df)).epsilon(1e-10));
}

TEST_CASE("welch degenerate and symmetric cases") {
  const auto same = welch_t_test(V{1, 2, 3, 4}, V{1, 2, 3, 4});
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0));

  const auto flat = welch_t_test(V{2, 2, 2}, V{2, 2, 2});
  CHECK(flat.t == 0.0);
  CHECK(flat.p == 1.0);
  const auto split = welch_t_test(V{2, 2, 2}, V{3, 3, 3});
  CHECK(std::isinf(split.t));
  CHECK(split.t < 0);
  CHECK(split.p == 0.0);

  const V a{1.0, 4.0, 2.5, 3.3}, b{0.2, -1.0, 0.7};
  const auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t));
  CHECK(ab.p == doctest::Approx(ba.p));
  CHECK(ab.df == doctest::Approx(ba.df));
  CHECK_THROWS(welch_t_test(V{1}, V{1, 2}));
}

TEST_CASE("welch is calibrated under the null") {
  Rng rng(2024);
  std::normal_distribution<double> n01;
  int rejected = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    V a(30), b(30);
    for (auto& x : a) x = n01(rng);
    for (auto& x : b) x = n01(rng);
    rejected += welch_t_test(a, b).p < 0.05;
  }
  const double rate = static_cast<double>(rejected) / trials;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.07);
}

TEST_CASE("incomplete beta against boost") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 150.0}) {
    for (double b : {0.5, 1.0, 3.0, 40.0}) {
      for (double x : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-9}) {
        const double expect = boost::math::ibeta(a, b, x);
        CHECK(incomplete_beta(x, a, b) == doctest::Approx(expect).epsilon(1e-10));
        if (expect > 0) CHECK(log_incomplete_beta(x, a, b) == doctest::Approx(std::log(expect)).epsilon(1e-10));
      }
    }
  }
  CHECK(incomplete_beta(0.0, 2, 3) == 0.0);
  CHECK(incomplete_beta(1.0, 2, 3) == 1.0);
}

TEST_CASE("log p stays finite when p underflows") {
  const double lp = log_t_two_sided_p(80.0, 500.0);
  CHECK(std::isfinite(lp));
  CHECK(lp < std::log(1e-250));
  // Moderate case where boost is representable.
  CHECK(log_t_two_sided_p(6.0, 20.0) == doctest::Approx(std::log(boost_t_p(6.0, 20.0))).epsilon(1e-10));
  const auto big = welch_from_moments(100.0, 1.0, 1000, 0.0, 1.0, 1000);
  CHECK(big.p == 0.0);
  CHECK(big.log10_p < -300);
  CHECK(std::isfinite(big.log10_p));
}

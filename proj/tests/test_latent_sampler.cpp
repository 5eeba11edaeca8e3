#include "synth/latent_sampler.hpp"
#include "synth/kernels.hpp"
#include "synth/linalg.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace synth;

namespace {

Matrix two_clusters(Index n, std::uint64_t seed) {
  Matrix x = testing::random_matrix(n, 2, seed);
  for (Index i = 0; i < n; ++i) x(i, 0) += (i % 2 == 0) ? 5.0 : -5.0;
  return x;
}

bool non_decreasing(const std::vector<double>& trace) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t] < trace[t - 1] - 1e-9 * std::abs(trace[t - 1])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fit_gmm with one component is the closed-form ML fit") {
  const Matrix x = testing::random_matrix(200, 3, 1);
  GmmConfig c;
  c.components = 1;
  c.reg = 0.0;
  const GmmModel m = fit_gmm(x, c);
  CHECK(m.weights(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((m.means[0] - x.colwise().mean().transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((m.covariances[0] - covariance(x, false)).cwiseAbs().maxCoeff() < 1e-10);

  c.reg = 1e-6;
  const GmmModel r = fit_gmm(x, c);
  Matrix expect = covariance(x, false);
  const double floor = 1e-6 * expect.diagonal().mean();
  CHECK(r.cov_floor == doctest::Approx(floor));
  expect.diagonal().array() += floor;
  CHECK((r.covariances[0] - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit_gmm recovers a planted two-component mixture") {
  const Matrix x = two_clusters(400, 7);
  GmmConfig c;
  c.components = 2;
  c.seed = 3;
  const GmmModel m = fit_gmm(x, c);
  const std::size_t pos = m.means[0](0) > 0 ? 0 : 1;
  CHECK(std::abs(m.means[pos](0) - 5.0) < 0.3);
  CHECK(std::abs(m.means[1 - pos](0) + 5.0) < 0.3);
  CHECK(std::abs(m.weights(0) - 0.5) < 0.1);
  CHECK(std::abs(m.weights.sum() - 1.0) < 1e-12);
  CHECK(non_decreasing(m.log_likelihood_trace));
}

TEST_CASE("fit_gmm: log-likelihood is monotone and covariances stay PSD") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix x = testing::random_matrix(150, 3, 50 + seed);
    GmmConfig c;
    c.components = 4;
    c.seed = seed;
    const GmmModel m = fit_gmm(x, c);
    CHECK(non_decreasing(m.log_likelihood_trace));
    CHECK(std::abs(m.weights.sum() - 1.0) < 1e-12);
    for (const auto& cov : m.covariances) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      CHECK(eig.eigenvalues().minCoeff() >= m.cov_floor * (1 - 1e-6));
    }
    CHECK(gmm_log_likelihood(m, x) == doctest::Approx(m.log_likelihood_trace.back()).epsilon(1e-12));
  }
}

TEST_CASE("fit_gmm rejects more components than rows") {
  GmmConfig c;
  c.components = 6;
  CHECK_THROWS_AS(fit_gmm(testing::random_matrix(5, 2, 1), c), ConfigError);
}

TEST_CASE("fit_gmm re-seeds components that lose all mass") {
  // Two tight groups and three components: seeding on duplicates leaves one empty.
  Matrix x(6, 1);
  x << 0, 0, 0, 10, 10, 10;
  GmmConfig c;
  c.components = 3;
  c.max_iters = 20;
  const GmmModel m = fit_gmm(x, c);
  CHECK(m.weights.allFinite());
  CHECK(std::abs(m.weights.sum() - 1.0) < 1e-12);
}

TEST_CASE("sample_gmm: degenerate covariance returns the mean") {
  GmmModel m;
  m.weights = Vector::Ones(1);
  m.means = {Vector::LinSpaced(3, 1.0, 3.0)};
  m.covariances = {Matrix::Zero(3, 3)};
  const Matrix s = sample_gmm(m, 50, 1);
  for (Index i = 0; i < s.rows(); ++i) CHECK(s.row(i) == m.means[0].transpose());
}

TEST_CASE("sample_gmm: empirical moments converge to the component") {
  GmmModel m;
  m.weights = Vector::Ones(1);
  Vector mu(2);
  mu << 1.0, -2.0;
  Matrix cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  m.means = {mu};
  m.covariances = {cov};
  const Matrix s = sample_gmm(m, 100000, 7);
  CHECK((s.colwise().mean().transpose() - mu).cwiseAbs().maxCoeff() < 0.05);
  CHECK((covariance(s, true) - cov).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("sample_gmm: component frequencies follow the weights") {
  GmmModel m;
  m.weights = Vector(2);
  m.weights << 0.9, 0.1;
  m.means = {Vector::Constant(1, -100.0), Vector::Constant(1, 100.0)};
  m.covariances = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  const Matrix s = sample_gmm(m, 10000, 11);
  const double frac = static_cast<double>((s.col(0).array() < 0).count()) / 10000.0;
  CHECK(frac >= 0.88);
  CHECK(frac <= 0.92);
  CHECK(sample_gmm(m, 100, 5) == sample_gmm(m, 100, 5));
}

TEST_CASE("sample_gmm rejects covariances that cannot be repaired") {
  GmmModel m;
  m.weights = Vector::Ones(1);
  m.means = {Vector::Zero(2)};
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  m.covariances = {bad};
  CHECK_THROWS_AS(sample_gmm(m, 10, 1), NumericError);
}

TEST_CASE("fit_geometry: identical neighbourhood has zero spread") {
  Matrix x(4, 2);
  x.rowwise() = RowVector::LinSpaced(2, 1.0, 2.0);
  GeometryConfig c;
  c.centroids = 1;
  c.neighbors = 4;
  const GeometrySampler s = fit_geometry(x, c);
  CHECK(s.local_means[0] == x.row(0).transpose());
  CHECK(s.local_covariances[0].cwiseAbs().maxCoeff() == 0.0);
  const Matrix draws = sample_geometry(s, 20, 3);
  for (Index i = 0; i < draws.rows(); ++i) CHECK(draws.row(i) == x.row(0));
}

TEST_CASE("fit_geometry: whole-set neighbourhoods give the global moments") {
  const Matrix x = testing::random_matrix(30, 3, 4);
  GeometryConfig c;
  c.centroids = 30;
  c.neighbors = 30;
  const GeometrySampler s = fit_geometry(x, c);
  const Vector mean = x.colwise().mean().transpose();
  const Matrix cov = covariance(x, true);
  for (Index k = 0; k < s.size(); ++k) {
    CHECK((s.local_means[static_cast<std::size_t>(k)] - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.local_covariances[static_cast<std::size_t>(k)] - cov).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("fit_geometry: local covariances of a line are rank one along the line") {
  Vector dir(2);
  dir << 1.0, 2.0;
  dir.normalize();
  Matrix x(60, 2);
  for (Index i = 0; i < 60; ++i) x.row(i) = (0.1 * static_cast<double>(i)) * dir.transpose();
  GeometryConfig c;
  c.centroids = 20;
  c.neighbors = 5;
  const GeometrySampler s = fit_geometry(x, c);
  for (const auto& cov : s.local_covariances) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    CHECK(eig.eigenvalues()(0) <= 1e-8);
    CHECK(std::abs(eig.eigenvectors().col(1).dot(dir)) > 1.0 - 1e-10);
  }
}

TEST_CASE("fit_geometry: precondition errors") {
  const Matrix x = testing::random_matrix(10, 2, 1);
  GeometryConfig c;
  c.neighbors = 1;
  CHECK_THROWS_AS(fit_geometry(x, c), ConfigError);
  c.neighbors = 11;
  CHECK_THROWS_AS(fit_geometry(x, c), ConfigError);
  c.neighbors = 3;
  c.centroids = 11;
  CHECK_THROWS_AS(fit_geometry(x, c), ConfigError);
}

TEST_CASE("fit_geometry: centroid moments ignore rows outside the neighbourhood") {
  const Matrix x = testing::random_matrix(80, 2, 8);
  GeometryConfig c;
  c.centroids = 10;
  c.neighbors = 6;
  c.seed = 4;
  const GeometrySampler s = fit_geometry(x, c);
  const auto m = kernels::serial::knn_local_moments(x, s.centroid_rows, 6);
  // Pick a row that is nobody's neighbour and move it far away.
  std::vector<bool> used(80, false);
  for (const auto& nb : m.neighbors)
    for (Index r : nb) used[static_cast<std::size_t>(r)] = true;
  Index free_row = 0;
  while (used[static_cast<std::size_t>(free_row)]) ++free_row;
  Matrix moved = x;
  moved.row(free_row) *= 50.0;
  const GeometrySampler t = fit_geometry(moved, c);
  REQUIRE(t.centroid_rows == s.centroid_rows);
  for (Index k = 0; k < s.size(); ++k) {
    CHECK(t.local_means[static_cast<std::size_t>(k)] == s.local_means[static_cast<std::size_t>(k)]);
    CHECK(t.local_covariances[static_cast<std::size_t>(k)] == s.local_covariances[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("sample_geometry splits the total evenly, remainder first") {
  CHECK(split_counts(7, 3) == std::vector<Index>{3, 2, 2});
  CHECK(split_counts(2, 3) == std::vector<Index>{1, 1, 0});
  GeometrySampler s;
  s.centroids = Matrix::Zero(3, 1);
  s.centroid_rows = {0, 1, 2};
  s.neighbors = 2;
  for (int k = 0; k < 3; ++k) {
    s.local_means.push_back(Vector::Constant(1, static_cast<double>(k)));
    s.local_covariances.push_back(Matrix::Zero(1, 1));
  }
  const Matrix d = sample_geometry(s, 7, 1);
  CHECK((d.col(0).array() == 0.0).count() == 3);
  CHECK((d.col(0).array() == 1.0).count() == 2);
  CHECK((d.col(0).array() == 2.0).count() == 2);
}

TEST_CASE("sample_geometry stays on a planted one-dimensional manifold") {
  Vector dir(2);
  dir << 3.0, 1.0;
  dir.normalize();
  Vector normal(2);
  normal << -dir(1), dir(0);
  Matrix x(200, 2);
  for (Index i = 0; i < 200; ++i) x.row(i) = (0.05 * static_cast<double>(i)) * dir.transpose();
  GeometryConfig c;
  c.neighbors = 5;
  c.seed = 2;
  const GeometrySampler s = fit_geometry(x, c);
  const Index total = 10000;
  const Matrix d = sample_geometry(s, total, 9);
  const auto counts = split_counts(total, s.size());
  Index row = 0, inside = 0;
  for (Index k = 0; k < s.size(); ++k) {
    const Matrix& cov = s.local_covariances[static_cast<std::size_t>(k)];
    const double floor = s.reg * cov.diagonal().mean();
    const double sigma = std::sqrt(normal.dot(cov * normal) + floor);
    for (Index j = 0; j < counts[static_cast<std::size_t>(k)]; ++j, ++row) {
      if (std::abs(d.row(row).dot(normal)) <= 3.0 * sigma) ++inside;
    }
  }
  CHECK(static_cast<double>(inside) >= 0.99 * static_cast<double>(total));
  CHECK(sample_geometry(s, 100, 4) == sample_geometry(s, 100, 4));
}

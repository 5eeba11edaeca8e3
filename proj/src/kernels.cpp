#include "synth/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>

namespace synth::kernels {

namespace {

struct Prepared {
  Vector log_norm;  // log w_g - 0.5 (d log 2pi + log det Sigma_g)
};

Prepared prepare(const Components& comps, Index dim) {
  const Index g_count = comps.log_weights.size();
  Prepared p{Vector(g_count)};
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (Index g = 0; g < g_count; ++g) {
    const double log_det = 2.0 * comps.chol_lower[static_cast<std::size_t>(g)].diagonal().array().log().sum();
    p.log_norm(g) = comps.log_weights(g) - 0.5 * (static_cast<double>(dim) * log_2pi + log_det);
  }
  return p;
}

void estep_row(const Matrix& points, const Components& comps, const Prepared& prep, Index i,
               EStep& out) {
  const Index g_count = comps.log_weights.size();
  Vector logp(g_count);
  for (Index g = 0; g < g_count; ++g) {
    const auto& L = comps.chol_lower[static_cast<std::size_t>(g)];
    const Vector diff = points.row(i).transpose() - comps.means[static_cast<std::size_t>(g)];
    const Vector z = L.triangularView<Eigen::Lower>().solve(diff);
    logp(g) = prep.log_norm(g) - 0.5 * z.squaredNorm();
  }
  const double peak = logp.maxCoeff();
  double total = 0.0;
  for (Index g = 0; g < g_count; ++g) total += std::exp(logp(g) - peak);
  const double lse = peak + std::log(total);
  for (Index g = 0; g < g_count; ++g) out.responsibilities(i, g) = std::exp(logp(g) - lse);
  out.row_log_likelihood(i) = lse;
}

void check_components(const Matrix& points, const Components& comps) {
  const auto g_count = static_cast<std::size_t>(comps.log_weights.size());
  if (comps.means.size() != g_count || comps.chol_lower.size() != g_count) {
    throw ShapeError("gmm_estep", "component arrays disagree in length");
  }
  for (std::size_t g = 0; g < g_count; ++g) {
    if (comps.means[g].size() != points.cols() || comps.chol_lower[g].rows() != points.cols()) {
      throw ShapeError("gmm_estep", "component dimension does not match points");
    }
  }
}

void knn_center(const Matrix& points, Index center, Index k, LocalMoments& out, std::size_t slot) {
  const Index n = points.rows();
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) dist[static_cast<std::size_t>(j)] = (points.row(j) - points.row(center)).squaredNorm();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto closer = [&](Index a, Index b) {
    const double da = dist[static_cast<std::size_t>(a)];
    const double db = dist[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    if ((a == center) != (b == center)) return a == center;
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
  order.resize(static_cast<std::size_t>(k));

  Vector mean = Vector::Zero(points.cols());
  for (Index r : order) mean += points.row(r).transpose();
  mean /= static_cast<double>(k);
  Matrix cov = Matrix::Zero(points.cols(), points.cols());
  for (Index r : order) {
    const Vector d = points.row(r).transpose() - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(k - 1);

  out.neighbors[slot] = std::move(order);
  out.means[slot] = std::move(mean);
  out.covariances[slot] = std::move(cov);
}

void check_knn(const Matrix& points, const std::vector<Index>& centers, Index k) {
  if (k < 2) throw ConfigError("knn_local_moments", "K must be at least 2");
  if (k > points.rows()) throw ConfigError("knn_local_moments", "K exceeds the number of points");
  for (Index c : centers) {
    if (c < 0 || c >= points.rows()) throw ShapeError("knn_local_moments", "center index out of range");
  }
}

LocalMoments make_moments(std::size_t count) {
  LocalMoments m;
  m.neighbors.resize(count);
  m.means.resize(count);
  m.covariances.resize(count);
  return m;
}

double welch_column(const Matrix& a, const Matrix& b, Index j) {
  const double na = static_cast<double>(a.rows());
  const double nb = static_cast<double>(b.rows());
  const double ma = a.col(j).sum() / na;
  const double mb = b.col(j).sum() / nb;
  const double va = (a.col(j).array() - ma).square().sum() / (na - 1.0);
  const double vb = (b.col(j).array() - mb).square().sum() / (nb - 1.0);
  if (va == 0.0 && vb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (ma - mb) / std::sqrt(va / na + vb / nb);
}

void check_welch(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("columnwise_welch_t", "groups have different feature counts");
  if (a.rows() < 2 || b.rows() < 2) throw ConfigError("columnwise_welch_t", "each group needs at least 2 rows");
}

}  // namespace

namespace serial {

EStep gmm_estep(const Matrix& points, const Components& comps) {
  check_components(points, comps);
  const Prepared prep = prepare(comps, points.cols());
  EStep out{Matrix(points.rows(), comps.log_weights.size()), Vector(points.rows())};
  for (Index i = 0; i < points.rows(); ++i) estep_row(points, comps, prep, i, out);
  return out;
}

LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k) {
  check_knn(points, centers, k);
  LocalMoments out = make_moments(centers.size());
  for (std::size_t c = 0; c < centers.size(); ++c) knn_center(points, centers[c], k, out, c);
  return out;
}

Vector columnwise_welch_t(const Matrix& a, const Matrix& b) {
  check_welch(a, b);
  Vector t(a.cols());
  for (Index j = 0; j < a.cols(); ++j) t(j) = welch_column(a, b, j);
  return t;
}

}  // namespace serial

namespace parallel {

EStep gmm_estep(const Matrix& points, const Components& comps) {
  check_components(points, comps);
  const Prepared prep = prepare(comps, points.cols());
  EStep out{Matrix(points.rows(), comps.log_weights.size()), Vector(points.rows())};
  const Index n = points.rows();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) estep_row(points, comps, prep, i, out);
  return out;
}

LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k) {
  check_knn(points, centers, k);
  LocalMoments out = make_moments(centers.size());
  const auto count = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    knn_center(points, centers[static_cast<std::size_t>(c)], k, out, static_cast<std::size_t>(c));
  }
  return out;
}

Vector columnwise_welch_t(const Matrix& a, const Matrix& b) {
  check_welch(a, b);
  Vector t(a.cols());
  const Index p = a.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) t(j) = welch_column(a, b, j);
  return t;
}

}  // namespace parallel

bool parallel_enabled() {
#ifdef SYNTH_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

EStep gmm_estep(const Matrix& points, const Components& comps) {
  return parallel_enabled() ? parallel::gmm_estep(points, comps) : serial::gmm_estep(points, comps);
}

LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k) {
  return parallel_enabled() ? parallel::knn_local_moments(points, centers, k)
                            : serial::knn_local_moments(points, centers, k);
}

Vector columnwise_welch_t(const Matrix& a, const Matrix& b) {
  return parallel_enabled() ? parallel::columnwise_welch_t(a, b) : serial::columnwise_welch_t(a, b);
}

}  // namespace synth::kernels

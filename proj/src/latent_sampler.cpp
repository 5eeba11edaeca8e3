#include "synth/latent_sampler.hpp"

#include "synth/kernels.hpp"
#include "synth/linalg.hpp"
#include "synth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace synth {

namespace {

// k-means++ seeding: first mean uniform, then proportional to squared
// distance from the nearest chosen mean.
std::vector<Vector> seed_means(const Matrix& latent, Index g_count, Rng& rng) {
  const Index n = latent.rows();
  std::vector<Vector> means;
  std::uniform_int_distribution<Index> first(0, n - 1);
  means.push_back(latent.row(first(rng)).transpose());
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (static_cast<Index>(means.size()) < g_count) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, (latent.row(i).transpose() - means.back()).squaredNorm());
      total += d;
    }
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= nearest[static_cast<std::size_t>(pick)];
        if (target <= 0.0 && nearest[static_cast<std::size_t>(pick)] > 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    means.push_back(latent.row(pick).transpose());
  }
  return means;
}

kernels::Components factor_components(const GmmModel& model) {
  kernels::Components comps;
  comps.log_weights = model.weights.array().log();
  comps.means = model.means;
  for (const auto& cov : model.covariances) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("fit_gmm", "component covariance is not positive definite; increase the regularization");
    }
    comps.chol_lower.push_back(llt.matrixL());
  }
  return comps;
}

double total_log_likelihood(const kernels::EStep& e) {
  double sum = 0.0;
  for (Index i = 0; i < e.row_log_likelihood.size(); ++i) sum += e.row_log_likelihood(i);
  return sum;
}

Matrix with_floor(Matrix cov, double floor) {
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += floor;
  return cov;
}

}  // namespace

GmmModel fit_gmm(const Matrix& latent, const GmmConfig& config) {
  const Index n = latent.rows();
  const Index d = latent.cols();
  const Index g_count = config.components;
  if (g_count < 1) throw ConfigError("fit_gmm", "G must be positive");
  if (d < 1) throw ConfigError("fit_gmm", "latent dimension must be positive");
  if (g_count > n) {
    throw ConfigError("fit_gmm", "G = " + std::to_string(g_count) + " exceeds n = " + std::to_string(n));
  }
  if (config.max_iters < 1) throw ConfigError("fit_gmm", "max_iters must be positive");
  if (!(config.tol > 0.0)) throw ConfigError("fit_gmm", "tol must be positive");
  if (!(config.reg >= 0.0)) throw ConfigError("fit_gmm", "reg must be non-negative");
  if (!latent.allFinite()) throw DataError("fit_gmm", "latent rows contain non-finite values");

  const Matrix global = covariance(latent, false);
  GmmModel model;
  model.cov_floor = config.reg * global.diagonal().mean();
  if (model.cov_floor == 0.0) model.cov_floor = config.reg;

  Rng rng(config.seed);
  model.means = seed_means(latent, g_count, rng);
  model.covariances.assign(static_cast<std::size_t>(g_count), with_floor(global, model.cov_floor));
  model.weights = Vector::Constant(g_count, 1.0 / static_cast<double>(g_count));

  kernels::EStep e = kernels::gmm_estep(latent, factor_components(model));
  double ll = total_log_likelihood(e);
  model.log_likelihood_trace.push_back(ll);

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const Vector mass = e.responsibilities.colwise().sum();
    std::vector<Index> used;
    for (Index g = 0; g < g_count; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      if (mass(g) < 1e-8) {
        // Empty component: restart it at the worst-explained row not yet used.
        Index worst = -1;
        for (Index i = 0; i < n; ++i) {
          if (std::find(used.begin(), used.end(), i) != used.end()) continue;
          if (worst < 0 || e.row_log_likelihood(i) < e.row_log_likelihood(worst)) worst = i;
        }
        used.push_back(worst);
        model.means[gi] = latent.row(worst).transpose();
        model.covariances[gi] = with_floor(global, model.cov_floor);
        model.weights(g) = 1.0 / static_cast<double>(n);
        ++model.reseeds;
        continue;
      }
      const Vector r = e.responsibilities.col(g);
      const Vector mean = (latent.transpose() * r) / mass(g);
      const Matrix centered = latent.rowwise() - mean.transpose();
      const Matrix weighted = centered.array().colwise() * r.array();
      model.means[gi] = mean;
      model.covariances[gi] = with_floor((weighted.transpose() * centered) / mass(g), model.cov_floor);
      model.weights(g) = mass(g) / static_cast<double>(n);
    }
    model.weights /= model.weights.sum();

    e = kernels::gmm_estep(latent, factor_components(model));
    const double next = total_log_likelihood(e);
    model.log_likelihood_trace.push_back(next);
    const bool done = std::abs(next - ll) < config.tol * std::abs(ll);
    ll = next;
    if (done) break;
  }
  return model;
}

double gmm_log_likelihood(const GmmModel& model, const Matrix& points) {
  return total_log_likelihood(kernels::gmm_estep(points, factor_components(model)));
}

Matrix sample_gmm(const GmmModel& model, Index count, std::uint64_t seed) {
  const Index g_count = model.components();
  if (g_count < 1) throw ConfigError("sample_gmm", "model has no components");
  if (count < 0) throw ConfigError("sample_gmm", "count must be non-negative");
  if (std::abs(model.weights.sum() - 1.0) > 1e-9 || (model.weights.array() < 0).any()) {
    throw ConfigError("sample_gmm", "mixture weights are not a probability vector");
  }
  std::vector<Matrix> factors;
  for (const auto& cov : model.covariances) factors.push_back(psd_factor(cov, 0.0));

  const Index d = model.dim();
  Rng rng(seed);
  std::discrete_distribution<Index> pick(model.weights.data(), model.weights.data() + g_count);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(count, d);
  Vector z(d);
  for (Index i = 0; i < count; ++i) {
    const auto g = static_cast<std::size_t>(pick(rng));
    for (Index j = 0; j < d; ++j) z(j) = normal(rng);
    out.row(i) = (model.means[g] + factors[g] * z).transpose();
  }
  return out;
}

std::vector<Index> split_counts(Index total, Index parts) {
  if (parts < 1) throw ConfigError("split_counts", "need at least one part");
  std::vector<Index> counts(static_cast<std::size_t>(parts), total / parts);
  for (Index i = 0; i < total % parts; ++i) ++counts[static_cast<std::size_t>(i)];
  return counts;
}

GeometrySampler fit_geometry(const Matrix& latent, const GeometryConfig& config) {
  const Index n = latent.rows();
  if (n < 1) throw ConfigError("fit_geometry", "no latent rows");
  const Index k = config.neighbors > 0 ? config.neighbors : std::min<Index>(10, n);
  const Index c = config.centroids > 0 ? config.centroids : std::min<Index>(n, std::max<Index>(50, n / 2));
  if (k < 2) throw ConfigError("fit_geometry", "K must be at least 2 for a covariance");
  if (k > n) throw ConfigError("fit_geometry", "K = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  if (c > n) throw ConfigError("fit_geometry", "centroid count exceeds n = " + std::to_string(n));
  if (!(config.reg >= 0.0)) throw ConfigError("fit_geometry", "reg must be non-negative");

  Rng rng(config.seed);
  std::vector<Index> rows = sample_without_replacement(n, c, rng);
  std::sort(rows.begin(), rows.end());

  kernels::LocalMoments moments = kernels::knn_local_moments(latent, rows, k);
  GeometrySampler s;
  s.centroid_rows = rows;
  s.centroids.resize(c, latent.cols());
  for (Index i = 0; i < c; ++i) s.centroids.row(i) = latent.row(rows[static_cast<std::size_t>(i)]);
  s.local_means = std::move(moments.means);
  s.local_covariances = std::move(moments.covariances);
  s.neighbors = k;
  s.reg = config.reg;
  return s;
}

Matrix sample_geometry(const GeometrySampler& sampler, Index total, std::uint64_t seed) {
  const Index c = sampler.size();
  if (c < 1) throw ConfigError("sample_geometry", "sampler has no centroids");
  if (total < 0) throw ConfigError("sample_geometry", "total must be non-negative");
  const std::vector<Index> counts = split_counts(total, c);
  std::vector<Index> offsets(counts.size(), 0);
  for (std::size_t i = 1; i < counts.size(); ++i) offsets[i] = offsets[i - 1] + counts[i - 1];

  std::vector<Matrix> factors;
  factors.reserve(static_cast<std::size_t>(c));
  for (const auto& cov : sampler.local_covariances) {
    factors.push_back(psd_factor(cov, sampler.reg * cov.diagonal().mean()));
  }

  const Index d = sampler.dim();
  Matrix out(total, d);
#pragma omp parallel for schedule(dynamic, 4)
  for (Index ci = 0; ci < c; ++ci) {
    const auto slot = static_cast<std::size_t>(ci);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ci)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(d);
    for (Index s = 0; s < counts[slot]; ++s) {
      for (Index j = 0; j < d; ++j) z(j) = normal(rng);
      out.row(offsets[slot] + s) = (sampler.local_means[slot] + factors[slot] * z).transpose();
    }
  }
  return out;
}

Matrix sample_latent(const LatentSampler& sampler, Index count, std::uint64_t seed) {
  if (const auto* g = std::get_if<GmmModel>(&sampler)) return sample_gmm(*g, count, seed);
  return sample_geometry(std::get<GeometrySampler>(sampler), count, seed);
}

const char* sampler_kind(const LatentSampler& sampler) {
  return std::holds_alternative<GmmModel>(sampler) ? "gmm" : "geometry";
}

}  // namespace synth

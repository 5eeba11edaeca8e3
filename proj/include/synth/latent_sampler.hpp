#pragma once

#include "synth/types.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace synth {

/// Relative regularization: floor = reg * mean diagonal of the reference covariance.
inline constexpr double kDefaultCovarianceReg = 1e-6;

struct GmmConfig {
  Index components = 5;
  int max_iters = 200;
  double tol = 1e-8;
  double reg = kDefaultCovarianceReg;
  std::uint64_t seed = 0;
};

struct GmmModel {
  Vector weights;                   // G, sums to 1
  std::vector<Vector> means;        // G x k_s
  std::vector<Matrix> covariances;  // G x (k_s x k_s), floor already added
  double cov_floor = 0.0;
  std::vector<double> log_likelihood_trace;
  int reseeds = 0;

  Index components() const { return weights.size(); }
  Index dim() const { return means.empty() ? 0 : means.front().size(); }
};

struct GeometryConfig {
  Index centroids = 0;  // 0: min(n, max(50, n / 2))
  Index neighbors = 0;  // 0: min(10, n)
  double reg = kDefaultCovarianceReg;
  std::uint64_t seed = 0;
};

struct GeometrySampler {
  std::vector<Index> centroid_rows;  // ascending row indices into the fitted latent matrix
  Matrix centroids;                  // centroid_rows.size() x k_s
  std::vector<Vector> local_means;
  std::vector<Matrix> local_covariances;  // unregularized
  Index neighbors = 0;
  double reg = kDefaultCovarianceReg;     // floor per centroid = reg * mean diag(Omega_C)

  Index size() const { return static_cast<Index>(local_means.size()); }
  Index dim() const { return centroids.cols(); }
};

using LatentSampler = std::variant<GmmModel, GeometrySampler>;

/// EM fit of a G-component full-covariance mixture to latent rows.
GmmModel fit_gmm(const Matrix& latent, const GmmConfig& config);
Matrix sample_gmm(const GmmModel& model, Index count, std::uint64_t seed);
/// Mixture log-likelihood of rows under the model.
double gmm_log_likelihood(const GmmModel& model, const Matrix& points);

/// Per-centroid local Gaussians from the K nearest latent rows of random centroids.
GeometrySampler fit_geometry(const Matrix& latent, const GeometryConfig& config);
Matrix sample_geometry(const GeometrySampler& sampler, Index total, std::uint64_t seed);
/// Even split of `total` across `parts`, remainder to the first parts.
std::vector<Index> split_counts(Index total, Index parts);

Matrix sample_latent(const LatentSampler& sampler, Index count, std::uint64_t seed);
const char* sampler_kind(const LatentSampler& sampler);

}  // namespace synth

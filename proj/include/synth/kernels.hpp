#pragma once

#include "synth/types.hpp"

#include <vector>

// Data-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; the two are
// required to agree bit for bit (each output element is computed by exactly
// one thread with the same operation order). The unqualified entry points
// dispatch to the parallel version when OpenMP is available.
namespace synth::kernels {

/// Gaussian mixture components in factored form.
struct Components {
  Vector log_weights;             // G
  std::vector<Vector> means;      // G x d
  std::vector<Matrix> chol_lower; // G lower-triangular Cholesky factors of Sigma_g
};

struct EStep {
  Matrix responsibilities;  // n x G, rows sum to 1
  Vector row_log_likelihood;  // n
};

struct LocalMoments {
  std::vector<std::vector<Index>> neighbors;  // per center, ordered by (distance, row)
  std::vector<Vector> means;
  std::vector<Matrix> covariances;  // unbiased, K - 1 divisor
};

namespace serial {
EStep gmm_estep(const Matrix& points, const Components& comps);
LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k);
Vector columnwise_welch_t(const Matrix& a, const Matrix& b);
}  // namespace serial

namespace parallel {
EStep gmm_estep(const Matrix& points, const Components& comps);
LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k);
Vector columnwise_welch_t(const Matrix& a, const Matrix& b);
}  // namespace parallel

EStep gmm_estep(const Matrix& points, const Components& comps);
LocalMoments knn_local_moments(const Matrix& points, const std::vector<Index>& centers, Index k);
/// Welch t per column of a vs b; NaN where both columns have zero variance.
Vector columnwise_welch_t(const Matrix& a, const Matrix& b);

/// True when the dispatching entry points run the OpenMP versions.
bool parallel_enabled();

}  // namespace synth::kernels

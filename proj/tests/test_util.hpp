#pragma once

#include "synth/dataset.hpp"
#include "synth/rng.hpp"
#include "synth/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace synth::testing {

inline std::vector<std::string> names(Index p, const std::string& prefix = "f") {
  std::vector<std::string> out;
  for (Index j = 0; j < p; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

inline Dataset make_dataset(Matrix values, std::string name = "x") {
  Dataset ds;
  ds.name = std::move(name);
  ds.feature_names = names(values.cols());
  ds.values = std::move(values);
  return ds;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return standard_normal_matrix(rows, cols, rng);
}

/// rows x cols matrix of exact rank k: left * right with Gaussian factors,
/// plus a per-column offset.
inline Matrix planted_low_rank(Index rows, Index cols, Index k, std::uint64_t seed, double offset = 3.0) {
  Rng rng(seed);
  const Matrix left = standard_normal_matrix(rows, k, rng);
  const Matrix right = standard_normal_matrix(k, cols, rng);
  Matrix out = left * right;
  for (Index j = 0; j < cols; ++j) out.col(j).array() += offset * static_cast<double>(j % 4);
  return out;
}

inline double rmse(const Matrix& a, const Matrix& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

/// Squared Frobenius residual of the best rank-k approximation (Jacobi SVD).
inline double svd_tail_energy(const Matrix& m, Index k) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  double tail = 0.0;
  for (Index i = k; i < s.size(); ++i) tail += s(i) * s(i);
  return tail;
}

/// Column-centered and (sample-sd) scaled copy, computed independently of the library.
inline Matrix standardize_oracle(const Matrix& m) {
  Matrix out = m;
  for (Index j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (Index i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    double ss = 0.0;
    for (Index i = 0; i < m.rows(); ++i) ss += (m(i, j) - mean) * (m(i, j) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m.rows() - 1));
    for (Index i = 0; i < m.rows(); ++i) out(i, j) = (m(i, j) - mean) / (sd > 0 ? sd : 1.0);
  }
  return out;
}

}  // namespace synth::testing

namespace synth::testing {

/// Two-class table with round(minority * n) rows of class "b", order shuffled
/// by seed. Class b rows are shifted by `shift` in every feature; all rows
/// share a rank-2 structure plus small noise.
inline Dataset planted_two_class(Index n, double minority, std::uint64_t seed, double shift = 3.0, Index p = 6) {
  Rng rng(seed);
  const Matrix latent = standard_normal_matrix(n, 2, rng);
  const Matrix load = standard_normal_matrix(2, p, rng);
  const Matrix noise = standard_normal_matrix(n, p, rng) * 0.1;
  const auto n_min = static_cast<Index>(std::llround(minority * static_cast<double>(n)));
  std::vector<int> cls(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n_min; ++i) cls[static_cast<std::size_t>(i)] = 1;
  std::shuffle(cls.begin(), cls.end(), rng);
  Dataset ds;
  ds.name = "planted";
  ds.feature_names = names(p);
  ds.values = latent * load + noise;
  Labels l;
  l.classes = {"a", "b"};
  for (Index i = 0; i < n; ++i) {
    l.codes.push_back(cls[static_cast<std::size_t>(i)]);
    if (cls[static_cast<std::size_t>(i)] == 1) ds.values.row(i).array() += shift;
  }
  ds.label = std::move(l);
  return ds;
}

}  // namespace synth::testing

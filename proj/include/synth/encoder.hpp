#pragma once

#include "synth/dataset.hpp"
#include "synth/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace synth {

struct FitConfig {
  Index k_s = 3;           // latent sample dimension (rows of C)
  Index k_f = 3;           // latent feature dimension (columns of C)
  int max_sweeps = 500;
  double rel_tol = 1e-8;
  double ridge = 1e-8;     // relative: lambda = ridge * mean diag of the normal matrix
  bool standardize = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Where a modality's one-hot label block sits among its columns.
struct LabelBlock {
  std::vector<std::string> classes;
  Index offset = 0;
};

struct ModalityFit {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix alpha;           // k_s x n
  Matrix beta;            // p x k_f
  Vector intercept;       // p, column means
  Vector column_scale;    // p, 1 where not standardized or constant
  Vector observed_min;    // p, training range, bounds for the optional clamp
  Vector observed_max;
  std::vector<double> loss_trace;  // squared Frobenius loss after this modality's visit, per sweep
  double final_loss = 0.0;         // loss of the stored factors
  std::optional<LabelBlock> label;

  Index n_features() const { return beta.rows(); }
};

/// Shared-code bilinear model D_L ~ alpha_L^T C beta_L^T + i_L for every modality L.
struct EncodingModel {
  FitConfig config;
  Matrix code;  // C, k_s x k_f, shared by all modalities
  std::vector<ModalityFit> modalities;
  std::vector<double> loss_trace;  // per sweep, sum of the per-modality traces
  int sweeps = 0;
  bool converged = false;

  const ModalityFit& modality(const std::string& name) const;
  Index n_samples() const { return modalities.empty() ? 0 : modalities.front().alpha.cols(); }
  Index k_s() const { return code.rows(); }
  Index k_f() const { return code.cols(); }
};

/// Centered (and optionally standardized) view of a modality's data.
struct Preprocessed {
  Matrix data;
  Vector intercept;
  Vector column_scale;
};
Preprocessed preprocess(const Matrix& raw, bool standardize);

EncodingModel fit_encoding(const std::vector<Dataset>& datasets, const FitConfig& config);

/// alpha^T C beta^T un-scaled and shifted back to original units.
Matrix reconstruct(const EncodingModel& model, const std::string& modality);

/// Latent rows (m x k_s) for new samples with C and beta frozen.
Matrix encode_new(const EncodingModel& model, const std::string& modality,
                  const Matrix& new_data);

/// Squared Frobenius residual of a modality in the centered/scaled space.
double modality_loss(const Matrix& scaled_data, const Matrix& alpha, const Matrix& code,
                     const Matrix& beta);

}  // namespace synth

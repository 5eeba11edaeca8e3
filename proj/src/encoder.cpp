#include "synth/encoder.hpp"

#include "synth/linalg.hpp"
#include "synth/rng.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace synth {

namespace {

Matrix apply_preprocess(const Matrix& raw, const Vector& intercept, const Vector& scale) {
  return (raw.rowwise() - intercept.transpose()).array().rowwise() / scale.transpose().array();
}

double lambda_for(const Matrix& A, double ridge) { return ridge * normal_matrix_scale(A); }

// D ~ alpha^T (C beta^T): least squares for alpha (k_s x n).
Matrix update_alpha(const Matrix& data, const Matrix& code, const Matrix& beta, double ridge) {
  const Matrix design = (code * beta.transpose()).transpose();  // p x k_s
  return solve_ridge(design, data.transpose(), lambda_for(design, ridge));
}

// D ~ (alpha^T C) beta^T: least squares for beta (p x k_f).
Matrix update_beta(const Matrix& data, const Matrix& alpha, const Matrix& code, double ridge) {
  const Matrix design = alpha.transpose() * code;  // n x k_f
  return solve_ridge(design, data, lambda_for(design, ridge)).transpose();
}

// C = (alpha alpha^T)^-1 alpha D beta (beta^T beta)^-1, as two ridge solves.
Matrix update_code(const Matrix& data, const Matrix& alpha, const Matrix& beta, double ridge) {
  const Matrix left_design = alpha.transpose();  // n x k_s
  const Matrix left = solve_ridge(left_design, data, lambda_for(left_design, ridge));  // k_s x p
  return solve_ridge(beta, left.transpose(), lambda_for(beta, ridge)).transpose();
}

}  // namespace

void FitConfig::validate() const {
  if (k_s < 1 || k_f < 1) throw ConfigError("fit_encoding", "k_s and k_f must be positive");
  if (max_sweeps < 1) throw ConfigError("fit_encoding", "max_sweeps must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("fit_encoding", "rel_tol must be positive");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("fit_encoding", "ridge must be finite and non-negative");
}

const ModalityFit& EncodingModel::modality(const std::string& name) const {
  for (const auto& m : modalities) {
    if (m.name == name) return m;
  }
  throw ShapeError("encoding_model", "unknown modality '" + name + "'");
}

Preprocessed preprocess(const Matrix& raw, bool standardize) {
  Preprocessed out;
  const Index n = raw.rows();
  out.intercept = raw.colwise().mean().transpose();
  out.column_scale = Vector::Ones(raw.cols());
  if (standardize && n > 1) {
    for (Index j = 0; j < raw.cols(); ++j) {
      const double sd = std::sqrt((raw.col(j).array() - out.intercept(j)).square().sum() / static_cast<double>(n - 1));
      if (sd > 1e-12 * std::max(1.0, std::abs(out.intercept(j)))) out.column_scale(j) = sd;
    }
  }
  out.data = apply_preprocess(raw, out.intercept, out.column_scale);
  return out;
}

double modality_loss(const Matrix& scaled_data, const Matrix& alpha, const Matrix& code,
                     const Matrix& beta) {
  return (scaled_data - alpha.transpose() * (code * beta.transpose())).squaredNorm();
}

namespace {

// Upper-triangular R of the thin QR of `stacked`, or nothing when it is
// numerically rank deficient.
std::optional<Matrix> qr_factor(const Matrix& stacked) {
  const Index k = stacked.cols();
  const Eigen::HouseholderQR<Matrix> qr(stacked);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Vector d = r.diagonal().cwiseAbs();
  if (!(d.minCoeff() > 1e-12 * d.maxCoeff())) return std::nullopt;
  return r;
}

// alpha^T C beta^T is unchanged by alpha^T -> alpha^T R^-1, C -> R C S^T,
// beta -> beta S^-1. R and S come from the QR of the stacked factors, which
// leaves the stacked alpha^T and beta with orthonormal columns.
void rebalance_gauge(EncodingModel& model) {
  const Index k_s = model.k_s(), k_f = model.k_f();
  Index n_rows = 0, p_rows = 0;
  for (const auto& f : model.modalities) n_rows += f.alpha.cols(), p_rows += f.beta.rows();
  Matrix alphas(n_rows, k_s), betas(p_rows, k_f);
  Index ra = 0, rb = 0;
  for (const auto& f : model.modalities) {
    alphas.middleRows(ra, f.alpha.cols()) = f.alpha.transpose();
    betas.middleRows(rb, f.beta.rows()) = f.beta;
    ra += f.alpha.cols();
    rb += f.beta.rows();
  }
  const auto r = qr_factor(alphas);
  const auto s = qr_factor(betas);
  if (!r || !s) return;
  for (auto& f : model.modalities) {
    f.alpha = r->transpose().triangularView<Eigen::Lower>().solve(f.alpha);
    f.beta = s->transpose().triangularView<Eigen::Lower>().solve(f.beta.transpose()).transpose();
  }
  model.code = (*r) * model.code * s->transpose();
}

}  // namespace

EncodingModel fit_encoding(const std::vector<Dataset>& datasets, const FitConfig& config) {
  config.validate();
  if (datasets.empty()) throw ConfigError("fit_encoding", "at least one dataset is required");
  const Index n = datasets.front().rows();
  for (const auto& ds : datasets) {
    ds.validate();
    if (ds.rows() != n) {
      throw ShapeError("fit_encoding", "modality '" + ds.name + "' has " + std::to_string(ds.rows()) +
                                           " rows, expected " + std::to_string(n));
    }
  }
  if (config.k_s > n) {
    throw ConfigError("fit_encoding", "k_s = " + std::to_string(config.k_s) + " exceeds n_samples = " + std::to_string(n));
  }

  EncodingModel model;
  model.config = config;
  std::vector<Matrix> data;
  double total_energy = 0.0;
  for (const auto& ds : datasets) {
    const Matrix design = ds.design_matrix();
    if (config.k_f > design.cols()) {
      throw ConfigError("fit_encoding", "k_f = " + std::to_string(config.k_f) + " exceeds the " +
                                            std::to_string(design.cols()) + " features of '" + ds.name + "'");
    }
    for (const auto& other : model.modalities) {
      if (other.name == ds.name) throw ConfigError("fit_encoding", "duplicate modality name '" + ds.name + "'");
    }
    Preprocessed pre = preprocess(design, config.standardize);
    ModalityFit fit;
    fit.name = ds.name;
    fit.feature_names = ds.design_names();
    fit.intercept = std::move(pre.intercept);
    fit.column_scale = std::move(pre.column_scale);
    fit.observed_min = design.colwise().minCoeff().transpose();
    fit.observed_max = design.colwise().maxCoeff().transpose();
    if (ds.label) fit.label = LabelBlock{ds.label->classes, ds.cols()};
    total_energy += pre.data.squaredNorm();
    data.push_back(std::move(pre.data));
    model.modalities.push_back(std::move(fit));
  }

  Rng rng(config.seed);
  for (std::size_t l = 0; l < data.size(); ++l) {
    auto& fit = model.modalities[l];
    fit.alpha = standard_normal_matrix(config.k_s, n, rng);
    fit.beta = standard_normal_matrix(data[l].cols(), config.k_f, rng);
  }
  for (std::size_t l = 0; l < data.size(); ++l) {
    model.code = update_code(data[l], model.modalities[l].alpha, model.modalities[l].beta, config.ridge);
  }
  rebalance_gauge(model);

  const double zero_floor = 1e-24 * total_energy;
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    double total = 0.0;
    for (std::size_t l = 0; l < data.size(); ++l) {
      auto& fit = model.modalities[l];
      fit.alpha = update_alpha(data[l], model.code, fit.beta, config.ridge);
      fit.beta = update_beta(data[l], fit.alpha, model.code, config.ridge);
      model.code = update_code(data[l], fit.alpha, fit.beta, config.ridge);
      const double loss = modality_loss(data[l], fit.alpha, model.code, fit.beta);
      fit.loss_trace.push_back(loss);
      total += loss;
    }
    model.loss_trace.push_back(total);
    model.sweeps = sweep + 1;
    rebalance_gauge(model);
    if (total <= zero_floor) {
      model.converged = true;
      break;
    }
    if (model.loss_trace.size() >= 2) {
      const double prev = model.loss_trace[model.loss_trace.size() - 2];
      if (std::abs(prev - total) < config.rel_tol * prev) {
        model.converged = true;
        break;
      }
    }
  }

  // Later modalities may have moved C after an earlier modality's visit;
  // re-solve every alpha against the final code so stored factors agree.
  for (std::size_t l = 0; l < data.size(); ++l) {
    auto& fit = model.modalities[l];
    fit.alpha = update_alpha(data[l], model.code, fit.beta, config.ridge);
    fit.final_loss = modality_loss(data[l], fit.alpha, model.code, fit.beta);
  }
  return model;
}

Matrix reconstruct(const EncodingModel& model, const std::string& modality) {
  const ModalityFit& fit = model.modality(modality);
  const Matrix scaled = fit.alpha.transpose() * (model.code * fit.beta.transpose());
  return (scaled.array().rowwise() * fit.column_scale.transpose().array()).rowwise() +
         fit.intercept.transpose().array();
}

Matrix encode_new(const EncodingModel& model, const std::string& modality, const Matrix& new_data) {
  const ModalityFit& fit = model.modality(modality);
  if (new_data.cols() != fit.n_features()) {
    throw ShapeError("encode_new", "new data has " + std::to_string(new_data.cols()) + " columns, modality '" +
                                       modality + "' has " + std::to_string(fit.n_features()));
  }
  const Matrix centered = apply_preprocess(new_data, fit.intercept, fit.column_scale);
  return update_alpha(centered, model.code, fit.beta, model.config.ridge).transpose();
}

}  // namespace synth

#include "synth/generator.hpp"

#include "synth/rng.hpp"

#include <algorithm>
#include <string>

namespace synth {

namespace {

const ModalityFit& checked_modality(const Matrix& latent, const EncodingModel& model,
                                    const std::string& modality, const char* op) {
  if (latent.cols() != model.k_s()) {
    throw ShapeError(op, "latent rows have " + std::to_string(latent.cols()) + " columns, model has k_s = " +
                             std::to_string(model.k_s()));
  }
  try {
    return model.modality(modality);
  } catch (const ShapeError& e) {
    throw ShapeError(op, e.what());
  }
}

}  // namespace

SyntheticBatch SyntheticBatch::select_rows(const std::vector<Index>& rows) const {
  SyntheticBatch out;
  out.provenance = provenance;
  out.latent.resize(static_cast<Index>(rows.size()), latent.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.latent.row(static_cast<Index>(i)) = latent.row(rows[i]);
  for (const auto& [name, m] : decoded) {
    Matrix sub(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Index>(i)) = m.row(rows[i]);
    out.decoded.emplace(name, std::move(sub));
  }
  if (labels) {
    Labels l;
    l.classes = labels->classes;
    for (Index r : rows) l.codes.push_back(labels->codes[static_cast<std::size_t>(r)]);
    out.labels = std::move(l);
  }
  return out;
}

Matrix decode_centered(const Matrix& latent, const EncodingModel& model, const std::string& modality) {
  const ModalityFit& fit = checked_modality(latent, model, modality, "decode");
  return (latent * model.code) * fit.beta.transpose();
}

Matrix decode(const Matrix& latent, const EncodingModel& model, const std::string& modality) {
  const ModalityFit& fit = checked_modality(latent, model, modality, "decode");
  const Matrix scaled = (latent * model.code) * fit.beta.transpose();
  return (scaled.array().rowwise() * fit.column_scale.transpose().array()).rowwise() +
         fit.intercept.transpose().array();
}

SyntheticBatch make_batch(const Matrix& latent, const EncodingModel& model, Provenance provenance) {
  SyntheticBatch batch;
  batch.latent = latent;
  batch.provenance = std::move(provenance);
  for (const auto& m : model.modalities) batch.decoded.emplace(m.name, decode(latent, model, m.name));
  return batch;
}

void clamp_columns(Matrix& decoded, const Vector& lo, const Vector& hi) {
  if (lo.size() != decoded.cols() || hi.size() != decoded.cols()) {
    throw ShapeError("clamp_columns", "bounds do not match the column count");
  }
  for (Index j = 0; j < decoded.cols(); ++j) decoded.col(j) = decoded.col(j).cwiseMax(lo(j)).cwiseMin(hi(j));
}

std::vector<int> argmax_labels(const Matrix& block) {
  if (block.cols() < 1) throw ShapeError("assign_labels", "empty one-hot block");
  std::vector<int> codes(static_cast<std::size_t>(block.rows()));
  for (Index i = 0; i < block.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < block.cols(); ++j) {
      if (block(i, j) > block(i, best)) best = j;
    }
    codes[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return codes;
}

SyntheticBatch assign_labels(SyntheticBatch batch, const EncodingModel& model,
                             const std::string& label_modality) {
  const ModalityFit& fit = model.modality(label_modality);
  if (!fit.label) {
    throw DataError("assign_labels", "modality '" + label_modality + "' has no registered one-hot label columns");
  }
  auto it = batch.decoded.find(label_modality);
  if (it == batch.decoded.end()) throw ShapeError("assign_labels", "batch has no decoded '" + label_modality + "'");
  const auto width = static_cast<Index>(fit.label->classes.size());
  Labels labels;
  labels.classes = fit.label->classes;
  labels.codes = argmax_labels(it->second.middleCols(fit.label->offset, width));
  batch.labels = std::move(labels);
  return batch;
}

std::vector<Index> balance_indices(const std::vector<int>& codes, const std::vector<std::string>& classes,
                                   Index per_class, std::uint64_t seed) {
  if (per_class < 1) throw ConfigError("balance_classes", "per_class must be positive");
  std::vector<std::vector<Index>> members(classes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const int c = codes[i];
    if (c < 0 || static_cast<std::size_t>(c) >= classes.size()) throw DataError("balance_classes", "label code out of range");
    members[static_cast<std::size_t>(c)].push_back(static_cast<Index>(i));
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto count = static_cast<Index>(members[c].size());
    if (count > 0 && count < per_class) {
      throw DataError("balance_classes", "class '" + classes[c] + "' has " + std::to_string(count) +
                                             " rows, fewer than per_class = " + std::to_string(per_class) +
                                             "; generate a larger batch");
    }
  }
  Rng rng(seed);
  std::vector<Index> keep;
  for (const auto& rows : members) {
    if (rows.empty()) continue;
    for (Index pick : sample_without_replacement(static_cast<Index>(rows.size()), per_class, rng)) {
      keep.push_back(rows[static_cast<std::size_t>(pick)]);
    }
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

SyntheticBatch balance_classes(const SyntheticBatch& batch, Index per_class, std::uint64_t seed) {
  if (!batch.labels) throw DataError("balance_classes", "batch has no assigned labels");
  return batch.select_rows(balance_indices(batch.labels->codes, batch.labels->classes, per_class, seed));
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "gmm") return SamplerKind::gmm;
  if (name == "geometry") return SamplerKind::geometry;
  throw ConfigError("sampler", "unknown sampler '" + name + "' (expected gmm or geometry)");
}

const char* to_string(SamplerKind kind) { return kind == SamplerKind::gmm ? "gmm" : "geometry"; }

LatentSampler fit_sampler(const Matrix& latent, const SynthesisConfig& config, std::uint64_t seed) {
  if (config.sampler == SamplerKind::gmm) {
    GmmConfig g = config.gmm;
    g.seed = seed;
    return fit_gmm(latent, g);
  }
  GeometryConfig g = config.geometry;
  g.seed = seed;
  return fit_geometry(latent, g);
}

Dataset synthesize_dataset(const Dataset& real, const SynthesisConfig& config, Index count, std::uint64_t seed) {
  FitConfig fit = config.fit;
  fit.seed = derive_seed(seed, "fit");
  Dataset named = real;
  if (named.name.empty()) named.name = "data";
  const EncodingModel model = fit_encoding({named}, fit);
  const Matrix latent = model.modalities.front().alpha.transpose();
  const LatentSampler sampler = fit_sampler(latent, config, derive_seed(seed, "sampler"));
  const Matrix draws = sample_latent(sampler, count, derive_seed(seed, "sample"));
  SyntheticBatch batch = make_batch(draws, model, Provenance{sampler_kind(sampler), seed, {}});
  if (named.label) batch = assign_labels(std::move(batch), model, named.name);

  Dataset out;
  out.name = named.name;
  out.feature_names = named.feature_names;
  out.values = batch.decoded.at(named.name).leftCols(named.cols());
  out.label = batch.labels;
  return out;
}

}  // namespace synth

#pragma once

#include "synth/dataset.hpp"
#include "synth/encoder.hpp"
#include "synth/latent_sampler.hpp"
#include "synth/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synth {

struct Provenance {
  std::string sampler;     // "gmm", "geometry", ...
  std::uint64_t seed = 0;
  std::string model_hash;
};

/// Latent draws together with their decoded data-space rows.
struct SyntheticBatch {
  Matrix latent;                          // m x k_s
  std::map<std::string, Matrix> decoded;  // modality -> m x p, original units
  std::optional<Labels> labels;
  Provenance provenance;

  Index rows() const { return latent.rows(); }
  SyntheticBatch select_rows(const std::vector<Index>& rows) const;
};

/// latent * C * beta^T, un-scaled and intercept-shifted.
Matrix decode(const Matrix& latent, const EncodingModel& model, const std::string& modality);

/// Same map without the un-scaling and intercept; linear in `latent`.
Matrix decode_centered(const Matrix& latent, const EncodingModel& model,
                       const std::string& modality);

/// Decodes every modality of the model.
SyntheticBatch make_batch(const Matrix& latent, const EncodingModel& model, Provenance provenance);

/// Clamp each column to [lo, hi]; off by default in the pipeline.
void clamp_columns(Matrix& decoded, const Vector& lo, const Vector& hi);

/// Argmax over the decoded one-hot block; ties go to the lowest class index.
std::vector<int> argmax_labels(const Matrix& one_hot_block);

SyntheticBatch assign_labels(SyntheticBatch batch, const EncodingModel& model,
                             const std::string& label_modality);

/// Indices (ascending) of a subset with exactly per_class rows of every class
/// present. Throws DataError naming the first deficient class.
std::vector<Index> balance_indices(const std::vector<int>& codes,
                                   const std::vector<std::string>& classes, Index per_class,
                                   std::uint64_t seed);

SyntheticBatch balance_classes(const SyntheticBatch& batch, Index per_class, std::uint64_t seed);


enum class SamplerKind { gmm, geometry };

SamplerKind parse_sampler_kind(const std::string& name);
const char* to_string(SamplerKind kind);

/// Everything needed to go from a real table to synthetic rows.
struct SynthesisConfig {
  FitConfig fit;
  SamplerKind sampler = SamplerKind::gmm;
  GmmConfig gmm;
  GeometryConfig geometry;
};

LatentSampler fit_sampler(const Matrix& latent, const SynthesisConfig& config, std::uint64_t seed);

/// Fit encoding + sampler on `real`, draw `count` rows, decode them back to
/// the columns of `real` and assign labels when `real` is labelled.
Dataset synthesize_dataset(const Dataset& real, const SynthesisConfig& config, Index count,
                           std::uint64_t seed);

}  // namespace synth

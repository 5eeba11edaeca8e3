#pragma once

#include "synth/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace synth {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Deterministic sub-seed for a pipeline stage: the root seed hashed with a tag.
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

/// FNV-1a 64-bit hash, also used as the model content hash.
std::uint64_t fnv1a64(std::string_view bytes);

Matrix standard_normal_matrix(Index rows, Index cols, Rng& rng);

/// k distinct indices from [0, n), uniformly without replacement, in draw order.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng);

}  // namespace synth

#include "synth/rng.hpp"

#include <numeric>

namespace synth {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  return mix_seed(root ^ fnv1a64(tag));
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return mix_seed(mix_seed(root) + index);
}

Matrix standard_normal_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Row-major fill so the stream order does not depend on storage order.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace synth

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace newsclick {

using Rng = std::mt19937_64;

/// Seed of substream `stream` under `master`: the SplitMix64 finalizer applied
/// to master + (stream + 1) * 0x9E3779B97F4A7C15. Every seeded component
/// (bagging rounds, boosting stages, CV folds) derives its generator this
/// way so work can be reordered or parallelised without changing results.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// n draws with replacement from [0, n), returned in ascending order.
std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng);

/// m distinct indices from [0, n) via a partial Fisher-Yates shuffle,
/// returned in ascending order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng);

}  // namespace newsclick

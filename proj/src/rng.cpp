#include "newsclick/rng.hpp"

#include <algorithm>
#include <numeric>

#include "newsclick/error.hpp"

namespace newsclick {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  if (n == 0) return out;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& i : out) i = pick(rng);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
  if (m > n) throw ContractViolation("cannot draw more indices than the population holds");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace newsclick

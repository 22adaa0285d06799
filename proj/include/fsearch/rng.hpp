#ifndef FSEARCH_RNG_HPP
#define FSEARCH_RNG_HPP

#include <cstdint>
#include <random>

namespace fsearch {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Replicate r of a run with the given master seed always draws from the
// same stream, whether replicates run serially or in parallel.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = detail::splitmix64(master ^ detail::splitmix64(stream));
  return s ? s : 0x9E3779B97F4A7C15ULL;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t stream = 0) {
  return Rng(derive_seed(master, stream));
}

}  // namespace fsearch

#endif

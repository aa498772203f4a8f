#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ncc {

using Rng = std::mt19937_64;

/// Counter-based seed derivation. Any replicate can be regenerated from
/// (master, stream indices) without replaying earlier streams.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

}  // namespace ncc

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pmsm {

using Rng = std::mt19937_64;

/// Independent stream seed from a master seed and a stream label. Mixing is
/// splitmix64 over the label's FNV-1a hash, so streams are stable across runs
/// and platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(master, label, index));
}

}  // namespace pmsm

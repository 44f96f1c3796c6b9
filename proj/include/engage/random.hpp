#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace engage {

/// mt19937_64 seeded from every 64-bit word given (both halves of each feed the seed_seq).
inline std::mt19937_64 seeded_rng(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> seq;
  for (auto w : words) {
    seq.push_back(static_cast<std::uint32_t>(w));
    seq.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  std::seed_seq ss(seq.begin(), seq.end());
  return std::mt19937_64(ss);
}

}  // namespace engage

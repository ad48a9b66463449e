#ifndef RDREAM_RANK_TRANSFORM_HPP
#define RDREAM_RANK_TRANSFORM_HPP

#include <cstdint>

#include "rdream/types.hpp"

namespace rdream {

// Centered rank scores of a residual vector. Each score equals
// (# of residuals <= this one)/n - (n+1)/(2n) and lies in
// [-(n-1)/(2n), (n-1)/(2n)]; ties receive the maximal rank.
struct RankScores {
  Vector scores;
  std::uint64_t source_hash = 0;  // FNV-1a digest of the input residuals
};

RankScores centered_rank_transform(const Vector& residuals);

std::uint64_t fnv1a_bytes(const void* data, std::size_t size);

}  // namespace rdream

#endif  // RDREAM_RANK_TRANSFORM_HPP

#include "rdream/rank_transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdream/errors.hpp"

namespace rdream {

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 1469598103934665603ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

RankScores centered_rank_transform(const Vector& residuals) {
  const Index n = residuals.size();
  if (n < 1) throw TooFewObservationsError(n);
  if (!residuals.allFinite()) throw NonFiniteError("residuals");

  // Sort once; the <=-count of a value is the past-the-end position of its
  // tie block in the sorted order, i.e. the maximal rank.
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&residuals](Index a, Index b) {
    return residuals[a] < residuals[b];
  });

  const double center = (static_cast<double>(n) + 1.0) / (2.0 * n);
  RankScores out;
  out.scores.resize(n);
  Index pos = 0;
  while (pos < n) {
    Index end = pos + 1;
    const double v = residuals[order[static_cast<std::size_t>(pos)]];
    while (end < n && residuals[order[static_cast<std::size_t>(end)]] == v) {
      ++end;
    }
    const double score = static_cast<double>(end) / n - center;
    for (Index k = pos; k < end; ++k) {
      out.scores[order[static_cast<std::size_t>(k)]] = score;
    }
    pos = end;
  }
  out.source_hash = fnv1a_bytes(residuals.data(),
                                sizeof(double) * static_cast<std::size_t>(n));
  return out;
}

}  // namespace rdream

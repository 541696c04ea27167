#pragma once

#include <vector>

#include "camsel/orb.hpp"

namespace camsel {

struct MatchPair {
  int index_a = 0;
  int index_b = 0;
  int distance = 0;

  bool operator==(const MatchPair&) const = default;
};

inline constexpr int kDefaultMaxMatchDistance = 50;

/// Mutual nearest neighbours under Hamming distance. (i, j) is kept iff j is
/// i's nearest descriptor in `b`, i is j's nearest in `a`, and the distance is
/// at most `max_distance`. Ties go to the lower index. Result is ordered by
/// index_a.
std::vector<MatchPair> match_features(const FeatureSet& a, const FeatureSet& b,
                                      int max_distance = kDefaultMaxMatchDistance);

std::vector<MatchPair> match_descriptors(const std::vector<Descriptor256>& a,
                                         const std::vector<Descriptor256>& b,
                                         int max_distance = kDefaultMaxMatchDistance);

}  // namespace camsel

#include "camsel/matching.hpp"

#include <limits>

namespace camsel {

std::vector<MatchPair> match_descriptors(const std::vector<Descriptor256>& a,
                                         const std::vector<Descriptor256>& b, int max_distance) {
  std::vector<MatchPair> out;
  if (a.empty() || b.empty()) return out;

  const int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  std::vector<int> best_b(na, -1), best_b_dist(na, std::numeric_limits<int>::max());
  std::vector<int> best_a(nb, -1), best_a_dist(nb, std::numeric_limits<int>::max());
  for (int i = 0; i < na; ++i) {
    const Descriptor256& da = a[i];
    for (int j = 0; j < nb; ++j) {
      const int d = hamming_distance(da, b[j]);
      if (d < best_b_dist[i]) {
        best_b_dist[i] = d;
        best_b[i] = j;
      }
      if (d < best_a_dist[j]) {
        best_a_dist[j] = d;
        best_a[j] = i;
      }
    }
  }
  for (int i = 0; i < na; ++i) {
    const int j = best_b[i];
    if (best_a[j] == i && best_b_dist[i] <= max_distance) out.push_back({i, j, best_b_dist[i]});
  }
  return out;
}

std::vector<MatchPair> match_features(const FeatureSet& a, const FeatureSet& b, int max_distance) {
  return match_descriptors(a.descriptors, b.descriptors, max_distance);
}

}  // namespace camsel

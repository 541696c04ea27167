#include "camsel/oracle.hpp"

#include <algorithm>
#include <random>

namespace camsel {

void OracleConfig::validate() const {
  extract.validate();
  if (max_match_distance < 0 || max_match_distance > 256) throw InvalidArgument("max_match_distance out of range");
  if (ransac_iterations < 1) throw InvalidArgument("ransac_iterations must be positive");
  if (!(inlier_threshold > 0.0)) throw InvalidArgument("inlier_threshold must be positive");
}

namespace {

std::vector<int> inliers_of(const Fundamental& f, std::span<const Correspondence<double>> pairs, double threshold) {
  std::vector<int> in;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (epipolar_error(f, pairs[i]) <= threshold) in.push_back(static_cast<int>(i));
  return in;
}

}  // namespace

RansacResult ransac_fundamental(std::span<const Correspondence<double>> pairs, const OracleConfig& cfg) {
  RansacResult best;
  const int n = static_cast<int>(pairs.size());
  if (n < 8) return best;

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(n);
  std::vector<Correspondence<double>> sample(8);
  for (int it = 0; it < cfg.ransac_iterations; ++it) {
    // Partial Fisher-Yates draw of 8 distinct indices.
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int k = 0; k < 8; ++k) {
      const int j = k + static_cast<int>(rng() % static_cast<std::uint64_t>(n - k));
      std::swap(order[k], order[j]);
      sample[k] = pairs[order[k]];
    }
    Fundamental f;
    try {
      f = eight_point<double>(sample);
    } catch (const DegenerateConfiguration&) {
      continue;
    }
    auto in = inliers_of(f, pairs, cfg.inlier_threshold);
    if (!best.fundamental || in.size() > best.inliers.size()) {
      best.fundamental = f;
      best.inliers = std::move(in);
    }
  }
  if (!best.fundamental || best.inliers.size() < 8) return best;

  std::vector<Correspondence<double>> consensus;
  consensus.reserve(best.inliers.size());
  for (int i : best.inliers) consensus.push_back(pairs[i]);
  try {
    const Fundamental refit = eight_point<double>(consensus);
    auto in = inliers_of(refit, pairs, cfg.inlier_threshold);
    if (in.size() >= best.inliers.size()) {
      best.fundamental = refit;
      best.inliers = std::move(in);
    }
  } catch (const DegenerateConfiguration&) {
    // keep the best minimal-sample model
  }
  return best;
}

GoodFeatureReport evaluate_pair(const FeatureSet& prev, const FeatureSet& next, const OracleConfig& cfg) {
  GoodFeatureReport report;
  report.extracted_a = static_cast<int>(prev.size());
  report.extracted_b = static_cast<int>(next.size());
  const auto matches = match_features(prev, next, cfg.max_match_distance);
  report.matched = static_cast<int>(matches.size());
  if (report.matched < 8) return report;

  std::vector<Correspondence<double>> pairs;
  pairs.reserve(matches.size());
  for (const MatchPair& m : matches) {
    const Keypoint& a = prev.keypoints[m.index_a];
    const Keypoint& b = next.keypoints[m.index_b];
    pairs.push_back({{a.x, a.y}, {b.x, b.y}});
  }
  const RansacResult ransac = ransac_fundamental(pairs, cfg);
  if (ransac.fundamental) {
    report.fundamental = ransac.fundamental;
    report.good = static_cast<int>(ransac.inliers.size());
  }
  return report;
}

GoodFeatureReport count_good_features(const GrayImage& prev, const GrayImage& next, const OracleConfig& cfg) {
  cfg.validate();
  return evaluate_pair(extract(prev, cfg.extract), extract(next, cfg.extract), cfg);
}

}  // namespace camsel

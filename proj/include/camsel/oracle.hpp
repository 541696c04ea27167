#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "camsel/epipolar.hpp"
#include "camsel/matching.hpp"
#include "camsel/orb.hpp"

namespace camsel {

struct OracleConfig {
  ExtractConfig extract;
  int max_match_distance = kDefaultMaxMatchDistance;
  int ransac_iterations = 200;
  double inlier_threshold = 1.0;  // symmetric epipolar distance, pixels
  std::uint64_t seed = 7;

  void validate() const;
};

struct RansacResult {
  std::optional<Fundamental> fundamental;
  std::vector<int> inliers;  // indices into the input correspondences, ascending
};

/// RANSAC over the eight-point estimator with a seeded sampler. The model is
/// refit on the best consensus set; the returned inliers are exactly those
/// within `inlier_threshold` of the returned matrix.
RansacResult ransac_fundamental(std::span<const Correspondence<double>> pairs, const OracleConfig& cfg);

struct GoodFeatureReport {
  int extracted_a = 0;
  int extracted_b = 0;
  int matched = 0;
  int good = 0;
  std::optional<Fundamental> fundamental;
};

/// Matches two extracted frames and counts fundamental-matrix inliers.
GoodFeatureReport evaluate_pair(const FeatureSet& prev, const FeatureSet& next, const OracleConfig& cfg);

/// The "good feature" count of `prev` with respect to the frame that follows it.
GoodFeatureReport count_good_features(const GrayImage& prev, const GrayImage& next, const OracleConfig& cfg);

}  // namespace camsel

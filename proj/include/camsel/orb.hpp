#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "camsel/image.hpp"

namespace camsel {

/// Scale space used by the ORB detector. Level 0 is the source image; level i
/// has dimensions floor(source / scale_factor^i).
struct ImagePyramid {
  std::vector<GrayImage> levels;
  double scale_factor = 1.2;

  double scale(int level) const;
};

/// Builds `levels` area-averaged levels. Throws DimensionError when a level
/// would have a side below kMinExtractSide.
ImagePyramid build_pyramid(const GrayImage& image, int levels, double scale_factor);

/// An oriented corner. (x, y) are level-0 pixel coordinates; `angle` is in
/// radians in [0, 2*pi).
struct Keypoint {
  float x = 0.f;
  float y = 0.f;
  int level = 0;
  float angle = 0.f;
  float response = 0.f;
};

/// 256-bit binary descriptor, bit k stored in words[k / 64] at position k % 64.
struct Descriptor256 {
  std::array<std::uint64_t, 4> words{};

  bool bit(int k) const { return (words[k >> 6] >> (k & 63)) & 1u; }
  void set_bit(int k, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (k & 63);
    words[k >> 6] = value ? (words[k >> 6] | mask) : (words[k >> 6] & ~mask);
  }
  bool operator==(const Descriptor256&) const = default;
};

inline int hamming_distance(const Descriptor256& a, const Descriptor256& b) {
  return std::popcount(a.words[0] ^ b.words[0]) + std::popcount(a.words[1] ^ b.words[1]) +
         std::popcount(a.words[2] ^ b.words[2]) + std::popcount(a.words[3] ^ b.words[3]);
}

struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<Descriptor256> descriptors;
  std::string source_frame;

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
};

struct ExtractConfig {
  int max_features = 1000;
  int levels = 8;
  double scale_factor = 1.2;
  int fast_threshold = 20;
  int border = 16;
  int grid_cols = 4;
  int grid_rows = 4;
  int orientation_radius = 15;

  void validate() const;
};

// --- FAST-9 ---------------------------------------------------------------

/// Bresenham circle of radius 3 used by the segment test, clockwise from 12 o'clock.
inline constexpr std::array<std::array<int, 2>, 16> kFastCircle{{
    {0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
    {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3},
}};

/// Segment-test score at (x, y): the sum of absolute differences over the
/// contiguous arc of >= 9 circle pixels that are all brighter than
/// center + threshold or all darker than center - threshold. Zero when the
/// test fails. The circle must lie inside the image.
int fast_score(const GrayImage& image, int x, int y, int threshold);

/// FAST-9 corners with 3x3 non-maximum suppression. Coordinates are in the
/// frame of `image`; level is 0 and angle is 0. `border` must be >= 16.
std::vector<Keypoint> detect_fast(const GrayImage& image, int threshold, int border);

// --- orientation and steered BRIEF ------------------------------------------

/// Intensity-centroid angle of the disk of `radius` around (x, y) in the
/// frame of `image`, in [0, 2*pi). A patch with zero first moments yields 0.
float compute_orientation(const GrayImage& image, const Keypoint& kp, int radius);

inline constexpr int kBriefPatternVersion = 1;
inline constexpr int kSteeringBins = 12;

using SamplePair = std::array<int, 4>;  // px, py, qx, qy

/// The unrotated pattern, and its copy rotated by bin * 30 degrees.
std::span<const SamplePair, 256> brief_pattern();
std::span<const SamplePair, 256> steered_pattern(int bin);

/// Steering bin for an angle: nearest multiple of 30 degrees, modulo 12.
int steering_bin(float angle);

/// Steered BRIEF: bit k is set iff I(p_k) < I(q_k). `kp` is in the frame of
/// `image`. Throws OutOfBoundsError if the patch does not fit.
Descriptor256 describe_orb(const GrayImage& image, const Keypoint& kp);

/// Full ORB extraction: multi-level FAST, response ranking, spatial grid
/// quota, orientation and description. Deterministic.
FeatureSet extract(const GrayImage& image, const ExtractConfig& cfg, std::string source_frame = {});

}  // namespace camsel

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "camsel/image.hpp"
#include "camsel/labeling.hpp"
#include "camsel/synth.hpp"

namespace camsel::fixtures {

inline GrayImage random_image(int width, int height, std::uint64_t seed, int lo = 0, int hi = 255) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(lo, hi);
  Raster8 px(height, width);
  for (Eigen::Index i = 0; i < px.size(); ++i) px.data()[i] = static_cast<std::uint8_t>(dist(rng));
  return GrayImage(std::move(px));
}

inline GrayImage uniform_image(int width, int height, std::uint8_t value) {
  return GrayImage(Raster8::Constant(height, width, value));
}

/// Box-blurred uniform noise, contrast-stretched to [0, 255]. Unlike the
/// blob scenes its corners are all distinct.
inline GrayImage smooth_noise(int width, int height, int radius, std::uint64_t seed) {
  const GrayImage n = random_image(width + 2 * radius, height + 2 * radius, seed);
  Eigen::MatrixXi sum(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      sum(y, x) = n.pixels().block(y, x, 2 * radius + 1, 2 * radius + 1).cast<int>().sum();
  const int lo = sum.minCoeff(), hi = std::max(sum.maxCoeff(), lo + 1);
  Raster8 px(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) px(y, x) = static_cast<std::uint8_t>((sum(y, x) - lo) * 255 / (hi - lo));
  return GrayImage(std::move(px));
}

/// A fully textured 640x480 frame from the synthetic generator.
inline GrayImage textured_frame(std::uint64_t seed = 3, int frame = 0, double density = 1.0) {
  SceneSpec s;
  s.num_cameras = 1;
  s.frames_per_camera = 20;
  s.seed = seed;
  s.schedule.kind = DensitySchedule::Kind::Explicit;
  s.schedule.densities = {{density}};
  return render_frame(s, 0, frame);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("camsel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// A balanced synthetic sequence written under a scratch dir and labelled
/// with the default oracle.
struct LabeledDataset {
  SceneSpec spec;
  std::filesystem::path root;
  std::vector<FrameRecord> manifest;
  LabelSet labels;
};

inline LabeledDataset labeled_balanced_dataset(const std::string& name, std::uint64_t seed, int frames_per_camera,
                                               int sequence = 1) {
  SceneSpec s;
  s.sequence = sequence;
  s.seed = seed;
  s.frames_per_camera = frames_per_camera;
  s.schedule.kind = DensitySchedule::Kind::Balanced;
  LabeledDataset d;
  d.spec = s;
  d.root = scratch_dir(name);
  d.manifest = generate_dataset({s}, d.root).manifest;
  d.labels = label_sequence(d.manifest, d.root, OracleConfig{});
  return d;
}

}  // namespace camsel::fixtures

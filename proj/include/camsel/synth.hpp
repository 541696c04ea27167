#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camsel/image.hpp"
#include "camsel/manifest.hpp"

namespace camsel {

/// How texture density is assigned to (camera, time window) cells.
struct DensitySchedule {
  enum class Kind { Rotating, Balanced, Explicit };
  Kind kind = Kind::Rotating;
  // Rotating: window w makes camera (w mod num_cameras) rich, the rest poor.
  double rich = 1.0;
  double poor = 0.15;
  // Balanced: in every window half the cameras are rich, chosen so that each
  // camera's rich-window count stays within one of the others; each cell
  // draws its level uniformly from the matching list.
  std::vector<double> rich_levels{0.8, 0.9, 1.0};
  std::vector<double> poor_levels{0.0, 0.15, 0.3};
  // Explicit: densities[camera][window].
  std::vector<std::vector<double>> densities;
};

/// A synthetic multi-camera sequence. Each camera sees a two-layer blob
/// texture translating horizontally; within one window of `window_length`
/// frames consecutive frames are exact integer translations per layer (the
/// far layer moves `parallax` times as fast as the near one). Crossing into
/// a new window cuts to a freshly seeded scene.
struct SceneSpec {
  int sequence = 1;
  int num_cameras = 6;
  int frames_per_camera = 101;
  double fps = 20.0;
  int width = 640;
  int height = 480;
  int window_length = 20;
  DensitySchedule schedule;
  int shift_x = 5;
  int shift_y = 0;
  double parallax = 0.5;
  int blobs_at_full_density = 120;
  int min_blob = 4;
  int max_blob = 12;
  std::uint64_t seed = 1;

  void validate() const;
  int num_windows() const;
  std::int64_t period_ns() const;
  /// Resolved density matrix [camera][window].
  std::vector<std::vector<double>> densities() const;
  double density(int camera, int frame) const;
};

/// Which generated sequences serve which purpose.
struct DatasetPlan {
  std::vector<int> train_sequences{2, 3};
  std::vector<int> eval_sequences{1};
  int arbitration_sequence = 4;

  void validate() const;
};

/// One scene per sequence of `plan`: balanced schedules for the train and
/// eval sequences, the base schedule for the arbitration sequence. Seeds are
/// derived from `base.seed` and the sequence number.
std::vector<SceneSpec> plan_scenes(const SceneSpec& base, const DatasetPlan& plan);

/// Renders one frame without touching the filesystem.
GrayImage render_frame(const SceneSpec& spec, int camera, int frame);

struct GroundTruthRecord {
  int sequence = 1;
  int camera_id = 0;
  int frame = 0;
  double density = 0.0;
  int shift_x = 0;
  int shift_y = 0;
};

struct GeneratedSequence {
  std::vector<FrameRecord> manifest;
  std::vector<GroundTruthRecord> ground_truth;
};

/// Writes seq<S>/cam<C>/<frame>.png under `out_dir` for one sequence and
/// returns its records (paths relative to `out_dir`). Does not write the
/// manifest file itself; see generate_dataset.
GeneratedSequence generate_sequence(const SceneSpec& spec, const std::filesystem::path& out_dir);

/// Generates every sequence and writes `manifest.csv` and `groundtruth.csv`
/// into `out_dir`.
GeneratedSequence generate_dataset(const std::vector<SceneSpec>& specs, const std::filesystem::path& out_dir);

void write_ground_truth(const std::vector<GroundTruthRecord>& records, const std::filesystem::path& path);

/// Mean oracle good count expected for a 640x480 frame at `density` under the
/// default oracle configuration, interpolated from a measured ladder.
double expected_good_count(double density);

/// Expected mean good count over every labelable frame of `spec`, counting
/// pairs that cross a window boundary as zero.
double expected_mean_good_count(const SceneSpec& spec);

}  // namespace camsel

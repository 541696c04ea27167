#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "camsel/labeling.hpp"
#include "camsel/network.hpp"

namespace camsel {

/// Frames sharing one slot of the master time grid; index = camera id.
struct CameraFrameBatch {
  std::int64_t timestamp_ns = 0;
  std::vector<std::optional<FrameRecord>> frames;

  int present() const;
  std::vector<bool> present_mask() const;
};

/// Builds batches on the grid t0 + k * period, t0 being the earliest first
/// timestamp of any camera. Each frame goes to its nearest slot (ties to the
/// earlier one) if within `tolerance_ns` (default period / 2); a camera keeps
/// at most one frame per slot, the nearest. Empty slots are dropped.
/// `streams[c]` holds camera c's frames in time order.
std::vector<CameraFrameBatch> align_frames(const std::vector<std::vector<FrameRecord>>& streams,
                                           std::int64_t period_ns,
                                           std::optional<std::int64_t> tolerance_ns = std::nullopt);

/// Per-camera streams of one sequence, indexed by camera id.
std::vector<std::vector<FrameRecord>> camera_streams(const std::vector<FrameRecord>& manifest);

struct ArbitrationPolicy {
  double hysteresis_margin = 0.0;
  int top_k = 1;

  void validate(int num_cameras) const;
};

/// Probability of "good" for every camera of the batch; absent cameras score 0.
std::vector<double> score_batch(const ModelParams<float>& model, const CameraFrameBatch& batch,
                                const std::filesystem::path& root);

/// Top-k present cameras by descending score, ties to the lower index. With
/// a positive margin, `current` is kept (first in the result) while its
/// score is at least max - margin.
std::vector<int> select_camera(std::span<const double> scores, const std::vector<bool>& present,
                               const ArbitrationPolicy& policy, std::optional<int> current = std::nullopt);

struct SelectionRecord {
  std::int64_t timestamp_ns = 0;
  std::vector<double> scores;
  std::vector<int> selected;
  bool switched = false;
  // Oracle evaluation; absent when the selected frame has no successor.
  std::optional<int> selected_good;
  std::optional<double> all_camera_mean;
};

struct SelectionTrace {
  std::vector<SelectionRecord> records;

  int switch_count() const;
};

using Scorer = std::function<std::vector<double>(const CameraFrameBatch&)>;

Scorer classifier_scorer(const ModelParams<float>& model, const std::filesystem::path& root);
/// Scores each frame by its own good count / max_features, from precomputed reports.
Scorer oracle_scorer(const std::map<std::string, GoodFeatureReport>& reports, int max_features);

/// Runs selection over precomputed score vectors only.
SelectionTrace select_over(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<bool>>& present,
                           const ArbitrationPolicy& policy);

struct PipelineResult {
  SelectionTrace trace;
  double selected_mean = 0.0;    // mean good count of the forwarded camera
  double all_camera_mean = 0.0;  // mean over batches of the all-camera mean
  int evaluated_batches = 0;

  double ratio() const { return all_camera_mean > 0.0 ? selected_mean / all_camera_mean : 0.0; }
};

/// Aligns one sequence, scores and selects per batch, and evaluates the
/// selection against oracle `reports` (see frame_reports).
PipelineResult run_pipeline(const std::vector<FrameRecord>& manifest, const Scorer& scorer,
                            const ArbitrationPolicy& policy,
                            const std::map<std::string, GoodFeatureReport>& reports, std::int64_t period_ns);

/// Classifier-scored run that computes the oracle reports itself.
PipelineResult run_pipeline(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root,
                            const ModelParams<float>& model, const ArbitrationPolicy& policy,
                            const OracleConfig& oracle_cfg, std::int64_t period_ns);

void write_trace(const SelectionTrace& trace, const std::filesystem::path& path);

}  // namespace camsel

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "camsel/image.hpp"
#include "camsel/labeling.hpp"
#include "camsel/network.hpp"

namespace camsel {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 8;
  int batch_size = 128;
  std::uint64_t seed = 1;

  void validate() const;
};

/// First and second moment estimates, one tensor pair per parameter tensor
/// in layer order (weight, bias, weight, bias, ...).
template <typename Scalar>
struct AdamState {
  std::vector<Tensor<Scalar>> m;
  std::vector<Tensor<Scalar>> v;

  static AdamState zeros_like(const ModelParams<Scalar>& params);
};

/// One bias-corrected Adam update at step `t` (1-based), in place.
template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               const TrainConfig& cfg, long t);

struct Prediction {
  std::array<double, 2> probs{};
  int label = 0;  // argmax; 1 = good
};

std::vector<Prediction> predict(const ModelParams<float>& model, const Tensor<float>& batch);

/// Converts a frame to network input: area-resized to the model input and
/// scaled to [0, 1].
void to_input(const GrayImage& image, const ModelSpec& spec, float* out);

/// Images stacked as [N, 1, H, W] with their labels and camera ids.
struct LabeledImages {
  Tensor<float> images;
  std::vector<int> labels;
  std::vector<int> cameras;

  int size() const { return static_cast<int>(labels.size()); }
};

LabeledImages load_labeled_images(const LabelSet& labels, const std::filesystem::path& root, const ModelSpec& spec);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  ModelParams<float> params;
  std::vector<EpochRecord> history;
};

/// Seeded initialisation, then `epochs` passes of shuffled minibatches. The
/// last partial batch of an epoch is kept.
TrainResult train(const LabeledImages& data, const ModelSpec& spec, const TrainConfig& cfg);
TrainResult train(const LabelSet& labels, const std::filesystem::path& root, const ModelSpec& spec,
                  const TrainConfig& cfg);

/// One {"epoch", "mean_loss"} line per epoch. Wall time is left out so that
/// equal seeds give equal files.
void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

struct BinaryMetrics {
  int tp = 0, tn = 0, fp = 0, fn = 0;

  int total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  /// 1 when there are neither positives nor positive predictions.
  double f1() const;
};

struct CameraMetrics {
  int camera_id = 0;
  BinaryMetrics counts;
};

struct EvalReport {
  std::vector<CameraMetrics> per_camera;  // ascending camera id
  BinaryMetrics overall;
  double macro_accuracy = 0.0;
  double macro_f1 = 0.0;
};

EvalReport evaluate(const ModelParams<float>& model, const LabeledImages& data);
EvalReport evaluate(const ModelParams<float>& model, const LabelSet& labels, const std::filesystem::path& root);
/// Metrics from explicit predictions, for callers that already have them.
EvalReport evaluate_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                const std::vector<int>& cameras);

}  // namespace camsel

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camsel/image.hpp"
#include "camsel/manifest.hpp"
#include "camsel/network.hpp"
#include "camsel/oracle.hpp"

namespace camsel {

struct BenchConfig {
  int warmup = 30;
  int iterations = 100;
  bool parallel_extraction = false;  // adds a threaded matcher row

  void validate() const;
};

/// One 6-camera batch: every camera's current frame and its successor.
struct BenchBatch {
  std::vector<GrayImage> current;
  std::vector<GrayImage> next;
};

/// Decodes the frames at `frame_index` and `frame_index + 1` of every camera
/// in `sequence`.
BenchBatch load_bench_batch(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root, int sequence,
                            int frame_index = 0);

struct TimingStats {
  std::string method;
  int iterations = 0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double p95_ns = 0.0;
};

TimingStats summarize(std::string method, std::vector<double> samples_ns);

struct BenchReport {
  std::vector<TimingStats> methods;
  std::vector<std::pair<std::string, double>> ratios;  // of medians
  int warmup = 0;
  int iterations = 0;
  std::string hardware_note;

  const TimingStats& method(const std::string& name) const;
  double ratio(const std::string& name) const;
};

/// (a) extract + match on all cameras against cached previous features and
/// (b) classifier scoring of the same six frames, interleaved per iteration.
/// Ratio "speedup" = median(a) / median(b).
BenchReport bench_quality_scoring(const BenchBatch& batch, const ModelParams<float>& model,
                                  const OracleConfig& oracle_cfg, const BenchConfig& cfg);

/// One emulated tracking iteration is count_good_features on a camera's
/// (current, next) pair. Rows, each timed per 6-camera batch:
///   track_x1, track_x6, track_x1+match_x6, track_x1+classifier_x6, track_x2+classifier_x6
/// Tracked cameras are the classifier's top picks for the batch.
BenchReport bench_pipeline_setups(const BenchBatch& batch, const ModelParams<float>& model,
                                  const OracleConfig& oracle_cfg, const BenchConfig& cfg);

std::string format_table(const BenchReport& report);
/// Lines of {"method", "statistic", "value_ns"}.
void write_report_jsonl(const BenchReport& report, const std::filesystem::path& path, bool append = false);

}  // namespace camsel

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "camsel/manifest.hpp"
#include "camsel/oracle.hpp"

namespace camsel {

inline constexpr int kDefaultThreshold = 350;

/// Label of one frame: its good-feature count against the next frame of the
/// same camera, and whether that count clears the threshold.
struct FrameLabel {
  FrameRecord frame;
  int good_count = 0;
  int matched = 0;
  bool good = false;

  bool operator==(const FrameLabel&) const = default;
};

inline bool label_for(int good_count, int threshold) { return good_count > threshold; }

struct LabelSet {
  int threshold = kDefaultThreshold;
  OracleConfig oracle;
  std::vector<FrameLabel> labels;
};

/// Oracle reports for every frame that has a successor in its camera stream,
/// keyed by manifest path. Each frame is decoded and extracted once.
std::map<std::string, GoodFeatureReport> frame_reports(const std::vector<FrameRecord>& manifest,
                                                       const std::filesystem::path& root, const OracleConfig& cfg);

/// Labels every frame except the last of each (sequence, camera) stream.
/// Image paths are resolved against `root`.
LabelSet label_sequence(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root,
                        const OracleConfig& cfg, int threshold = kDefaultThreshold);

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 edges over [0, max count]
  std::vector<int> frequencies;
  double mean = 0.0;
  double median = 0.0;
};

Histogram compute_histogram(const LabelSet& labels, int bins);

/// Splits by whole sequence. Sequences named in neither list are dropped.
std::pair<LabelSet, LabelSet> split_by_sequence(const LabelSet& labels, const std::vector<int>& train_sequences,
                                                const std::vector<int>& eval_sequences);

/// Line-delimited JSON: a header object, then one object per label.
void write_labels(const LabelSet& labels, const std::filesystem::path& path);
LabelSet read_labels(const std::filesystem::path& path);

}  // namespace camsel

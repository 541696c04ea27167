#include "camsel/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "camsel/image.hpp"
#include "camsel/json_io.hpp"

namespace camsel {

std::map<std::string, GoodFeatureReport> frame_reports(const std::vector<FrameRecord>& manifest,
                                                       const std::filesystem::path& root, const OracleConfig& cfg) {
  cfg.validate();
  std::map<std::string, GoodFeatureReport> reports;
  for (const auto& stream : group_streams(manifest)) {
    if (stream.frames.size() < 2) continue;
    // Each frame is extracted once and reused as the "next" of its predecessor.
    FeatureSet prev = extract(read_png(root / stream.frames[0].path), cfg.extract, stream.frames[0].path);
    for (std::size_t i = 0; i + 1 < stream.frames.size(); ++i) {
      const auto& next_path = stream.frames[i + 1].path;
      FeatureSet next = extract(read_png(root / next_path), cfg.extract, next_path);
      reports[stream.frames[i].path] = evaluate_pair(prev, next, cfg);
      prev = std::move(next);
    }
  }
  return reports;
}

LabelSet label_sequence(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root,
                        const OracleConfig& cfg, int threshold) {
  if (threshold < 0) throw InvalidArgument("threshold must be non-negative");
  const auto reports = frame_reports(manifest, root, cfg);
  LabelSet set;
  set.threshold = threshold;
  set.oracle = cfg;
  for (const auto& stream : group_streams(manifest)) {
    for (std::size_t i = 0; i + 1 < stream.frames.size(); ++i) {
      const auto& r = reports.at(stream.frames[i].path);
      set.labels.push_back({stream.frames[i], r.good, r.matched, label_for(r.good, threshold)});
    }
  }
  return set;
}

Histogram compute_histogram(const LabelSet& labels, int bins) {
  if (labels.labels.empty()) throw EmptyDataset("histogram of an empty label set");
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  std::vector<int> counts;
  counts.reserve(labels.labels.size());
  for (const auto& l : labels.labels) counts.push_back(l.good_count);
  std::sort(counts.begin(), counts.end());

  Histogram h;
  const double top = std::max(counts.back(), 1);
  const double width = top / bins;
  for (int i = 0; i <= bins; ++i) h.bin_edges.push_back(i == bins ? top : width * i);
  h.frequencies.assign(static_cast<std::size_t>(bins), 0);
  long long sum = 0;
  for (int c : counts) {
    const int bin = std::min(static_cast<int>(c / width), bins - 1);
    ++h.frequencies[static_cast<std::size_t>(bin)];
    sum += c;
  }
  const std::size_t n = counts.size();
  h.mean = static_cast<double>(sum) / static_cast<double>(n);
  h.median = n % 2 ? counts[n / 2] : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
  return h;
}

std::pair<LabelSet, LabelSet> split_by_sequence(const LabelSet& labels, const std::vector<int>& train_sequences,
                                                const std::vector<int>& eval_sequences) {
  const std::set<int> train(train_sequences.begin(), train_sequences.end());
  const std::set<int> eval(eval_sequences.begin(), eval_sequences.end());
  for (int s : train)
    if (eval.count(s)) throw OverlapError("sequence " + std::to_string(s) + " is in both the train and eval split");
  std::pair<LabelSet, LabelSet> out;
  out.first.threshold = out.second.threshold = labels.threshold;
  out.first.oracle = out.second.oracle = labels.oracle;
  for (const auto& l : labels.labels) {
    if (train.count(l.frame.sequence)) out.first.labels.push_back(l);
    else if (eval.count(l.frame.sequence)) out.second.labels.push_back(l);
  }
  return out;
}

namespace {

constexpr const char* kLabelFormat = "camsel-labels";
constexpr int kLabelFormatVersion = 1;

}  // namespace

void write_labels(const LabelSet& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const Json header{{"format", kLabelFormat},
                    {"version", kLabelFormatVersion},
                    {"threshold", labels.threshold},
                    {"oracle", to_json(labels.oracle)}};
  out << header.dump() << '\n';
  for (const auto& l : labels.labels) {
    const Json rec{{"sequence", l.frame.sequence},   {"camera_id", l.frame.camera_id},
                   {"timestamp_ns", l.frame.timestamp_ns}, {"path", l.frame.path},
                   {"good_count", l.good_count},     {"matched", l.matched},
                   {"label", l.good ? 1 : 0}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

LabelSet read_labels(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("label file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  LabelSet set;
  int line_no = 0;
  try {
    if (!std::getline(in, line)) throw ConfigError("empty label file");
    ++line_no;
    const Json header = Json::parse(line);
    if (header.value("format", "") != kLabelFormat || header.value("version", 0) != kLabelFormatVersion)
      throw ConfigError("not a version " + std::to_string(kLabelFormatVersion) + " label file");
    set.threshold = header.at("threshold").get<int>();
    parse(header.at("oracle"), set.oracle);
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const Json rec = Json::parse(line);
      FrameLabel l;
      l.frame.sequence = rec.at("sequence").get<int>();
      l.frame.camera_id = rec.at("camera_id").get<int>();
      l.frame.timestamp_ns = rec.at("timestamp_ns").get<std::int64_t>();
      l.frame.path = rec.at("path").get<std::string>();
      l.good_count = rec.at("good_count").get<int>();
      l.matched = rec.at("matched").get<int>();
      l.good = rec.at("label").get<int>() == 1;
      if (l.good != label_for(l.good_count, set.threshold))
        throw ConfigError("label disagrees with threshold for " + l.frame.path);
      set.labels.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  return set;
}

}  // namespace camsel

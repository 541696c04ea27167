#include "camsel/arbitration.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "camsel/image.hpp"
#include "camsel/json_io.hpp"
#include "camsel/train.hpp"

namespace camsel {

int CameraFrameBatch::present() const {
  return static_cast<int>(std::count_if(frames.begin(), frames.end(), [](const auto& f) { return f.has_value(); }));
}

std::vector<bool> CameraFrameBatch::present_mask() const {
  std::vector<bool> mask;
  for (const auto& f : frames) mask.push_back(f.has_value());
  return mask;
}

std::vector<CameraFrameBatch> align_frames(const std::vector<std::vector<FrameRecord>>& streams,
                                           std::int64_t period_ns, std::optional<std::int64_t> tolerance_ns) {
  if (period_ns <= 0) throw InvalidArgument("alignment period must be positive");
  const std::int64_t tol = tolerance_ns.value_or(period_ns / 2);
  std::optional<std::int64_t> t0;
  for (const auto& s : streams)
    if (!s.empty()) t0 = t0 ? std::min(*t0, s.front().timestamp_ns) : s.front().timestamp_ns;
  if (!t0) return {};

  const std::size_t cams = streams.size();
  // slot -> per camera (frame index, distance)
  std::map<std::int64_t, std::vector<std::optional<std::pair<std::size_t, std::int64_t>>>> slots;
  for (std::size_t c = 0; c < cams; ++c) {
    for (std::size_t i = 0; i < streams[c].size(); ++i) {
      const std::int64_t dt = streams[c][i].timestamp_ns - *t0;
      std::int64_t k = dt / period_ns;
      if (dt - k * period_ns > (k + 1) * period_ns - dt) ++k;
      const std::int64_t dist = std::abs(dt - k * period_ns);
      if (dist > tol) continue;
      auto& row = slots[k];
      row.resize(cams);
      if (!row[c] || dist < row[c]->second) row[c] = std::make_pair(i, dist);
    }
  }
  std::vector<CameraFrameBatch> batches;
  for (const auto& [k, row] : slots) {
    CameraFrameBatch b;
    b.timestamp_ns = *t0 + k * period_ns;
    b.frames.resize(cams);
    for (std::size_t c = 0; c < cams; ++c)
      if (row[c]) b.frames[c] = streams[c][row[c]->first];
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<std::vector<FrameRecord>> camera_streams(const std::vector<FrameRecord>& manifest) {
  std::vector<std::vector<FrameRecord>> out;
  std::optional<int> sequence;
  for (const auto& s : group_streams(manifest)) {
    if (sequence && *sequence != s.sequence) throw InvalidArgument("camera_streams expects a single sequence");
    sequence = s.sequence;
    if (s.camera_id < 0) throw ManifestError("negative camera id");
    if (out.size() <= static_cast<std::size_t>(s.camera_id)) out.resize(static_cast<std::size_t>(s.camera_id) + 1);
    out[static_cast<std::size_t>(s.camera_id)] = s.frames;
  }
  return out;
}

void ArbitrationPolicy::validate(int num_cameras) const {
  if (!(hysteresis_margin >= 0.0 && hysteresis_margin <= 1.0))
    throw InvalidArgument("hysteresis margin must lie in [0, 1]");
  if (top_k < 1 || top_k > num_cameras)
    throw InvalidArgument("top_k must lie in [1, " + std::to_string(num_cameras) + "]");
}

std::vector<double> score_batch(const ModelParams<float>& model, const CameraFrameBatch& batch,
                                const std::filesystem::path& root) {
  std::vector<double> scores(batch.frames.size(), 0.0);
  const int n = batch.present();
  if (n == 0) return scores;
  const auto& spec = model.spec;
  Tensor<float> input({n, 1, spec.input_height, spec.input_width});
  const std::size_t stride = static_cast<std::size_t>(spec.input_height) * spec.input_width;
  std::vector<std::size_t> cams;
  for (std::size_t c = 0; c < batch.frames.size(); ++c) {
    if (!batch.frames[c]) continue;
    GrayImage image;
    try {
      image = read_png(root / batch.frames[c]->path);
    } catch (const Error& e) {
      throw ImageReadError("camera " + std::to_string(c) + ": " + e.what());
    }
    to_input(image, spec, input.data() + cams.size() * stride);
    cams.push_back(c);
  }
  const auto probs = forward(model, input);
  for (std::size_t i = 0; i < cams.size(); ++i) scores[cams[i]] = probs[2 * i + 1];
  return scores;
}

std::vector<int> select_camera(std::span<const double> scores, const std::vector<bool>& present,
                               const ArbitrationPolicy& policy, std::optional<int> current) {
  if (present.size() != scores.size()) throw ShapeMismatch("score and presence vectors differ in length");
  policy.validate(static_cast<int>(scores.size()));
  std::vector<int> order;
  for (std::size_t c = 0; c < scores.size(); ++c)
    if (present[c]) order.push_back(static_cast<int>(c));
  if (order.empty()) throw NoCandidate("no camera present in the batch");
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  const std::size_t k = std::min(order.size(), static_cast<std::size_t>(policy.top_k));

  if (policy.hysteresis_margin > 0.0 && current && *current >= 0 && *current < static_cast<int>(scores.size()) &&
      present[*current] && scores[*current] >= scores[order.front()] - policy.hysteresis_margin) {
    std::vector<int> out{*current};
    for (int c : order)
      if (out.size() < k && c != *current) out.push_back(c);
    return out;
  }
  order.resize(k);
  return order;
}

int SelectionTrace::switch_count() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.switched; }));
}

namespace {

bool same_selection(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

void append_selection(SelectionTrace& trace, std::int64_t ts, std::vector<double> scores,
                      const std::vector<bool>& present, const ArbitrationPolicy& policy) {
  std::optional<int> current;
  if (!trace.records.empty()) current = trace.records.back().selected.front();
  SelectionRecord rec;
  rec.timestamp_ns = ts;
  rec.selected = select_camera(scores, present, policy, current);
  rec.switched = !trace.records.empty() && !same_selection(rec.selected, trace.records.back().selected);
  rec.scores = std::move(scores);
  trace.records.push_back(std::move(rec));
}

}  // namespace

SelectionTrace select_over(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<bool>>& present,
                           const ArbitrationPolicy& policy) {
  if (scores.size() != present.size()) throw ShapeMismatch("score and presence traces differ in length");
  SelectionTrace trace;
  for (std::size_t i = 0; i < scores.size(); ++i)
    append_selection(trace, static_cast<std::int64_t>(i), scores[i], present[i], policy);
  return trace;
}

Scorer classifier_scorer(const ModelParams<float>& model, const std::filesystem::path& root) {
  return [&model, root](const CameraFrameBatch& batch) { return score_batch(model, batch, root); };
}

Scorer oracle_scorer(const std::map<std::string, GoodFeatureReport>& reports, int max_features) {
  if (max_features < 1) throw InvalidArgument("max_features must be positive");
  return [&reports, max_features](const CameraFrameBatch& batch) {
    std::vector<double> scores(batch.frames.size(), 0.0);
    for (std::size_t c = 0; c < batch.frames.size(); ++c) {
      if (!batch.frames[c]) continue;
      if (auto it = reports.find(batch.frames[c]->path); it != reports.end())
        scores[c] = static_cast<double>(it->second.good) / max_features;
    }
    return scores;
  };
}

PipelineResult run_pipeline(const std::vector<FrameRecord>& manifest, const Scorer& scorer,
                            const ArbitrationPolicy& policy,
                            const std::map<std::string, GoodFeatureReport>& reports, std::int64_t period_ns) {
  const auto batches = align_frames(camera_streams(manifest), period_ns);
  PipelineResult result;
  double selected_sum = 0.0, all_sum = 0.0;
  for (const auto& batch : batches) {
    try {
      append_selection(result.trace, batch.timestamp_ns, scorer(batch), batch.present_mask(), policy);
    } catch (const Error& e) {
      throw Error(e.category(), "batch at " + std::to_string(batch.timestamp_ns) + " ns: " + e.what());
    }
    auto& rec = result.trace.records.back();
    const auto& chosen = batch.frames[static_cast<std::size_t>(rec.selected.front())];
    const auto sel = reports.find(chosen->path);
    if (sel == reports.end()) continue;  // last frame of its stream
    double sum = 0.0;
    int n = 0;
    for (const auto& f : batch.frames) {
      if (!f) continue;
      if (auto it = reports.find(f->path); it != reports.end()) {
        sum += it->second.good;
        ++n;
      }
    }
    rec.selected_good = sel->second.good;
    rec.all_camera_mean = sum / n;
    selected_sum += *rec.selected_good;
    all_sum += *rec.all_camera_mean;
    ++result.evaluated_batches;
  }
  if (result.evaluated_batches > 0) {
    result.selected_mean = selected_sum / result.evaluated_batches;
    result.all_camera_mean = all_sum / result.evaluated_batches;
  }
  return result;
}

PipelineResult run_pipeline(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root,
                            const ModelParams<float>& model, const ArbitrationPolicy& policy,
                            const OracleConfig& oracle_cfg, std::int64_t period_ns) {
  const auto reports = frame_reports(manifest, root, oracle_cfg);
  return run_pipeline(manifest, classifier_scorer(model, root), policy, reports, period_ns);
}

void write_trace(const SelectionTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : trace.records) {
    Json j{{"timestamp_ns", r.timestamp_ns}, {"scores", r.scores}, {"selected", r.selected}, {"switch", r.switched}};
    j["selected_good"] = r.selected_good ? Json(*r.selected_good) : Json(nullptr);
    j["all_camera_mean"] = r.all_camera_mean ? Json(*r.all_camera_mean) : Json(nullptr);
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace camsel

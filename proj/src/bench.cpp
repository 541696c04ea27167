#include "camsel/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include "camsel/arbitration.hpp"
#include "camsel/json_io.hpp"
#include "camsel/train.hpp"

namespace camsel {

void BenchConfig::validate() const {
  if (warmup < 30) throw InsufficientIterations("at least 30 warm-up iterations are required, got " + std::to_string(warmup));
  if (iterations < 1) throw InsufficientIterations("at least one measured iteration is required");
}

BenchBatch load_bench_batch(const std::vector<FrameRecord>& manifest, const std::filesystem::path& root, int sequence,
                            int frame_index) {
  const auto streams = camera_streams(select_sequence(manifest, sequence));
  BenchBatch batch;
  for (std::size_t c = 0; c < streams.size(); ++c) {
    const auto& s = streams[c];
    if (frame_index < 0 || static_cast<std::size_t>(frame_index) + 1 >= s.size())
      throw MissingInput("camera " + std::to_string(c) + " of sequence " + std::to_string(sequence) +
                         " has no frame pair at index " + std::to_string(frame_index));
    batch.current.push_back(read_png(root / s[static_cast<std::size_t>(frame_index)].path));
    batch.next.push_back(read_png(root / s[static_cast<std::size_t>(frame_index) + 1].path));
  }
  if (batch.current.empty()) throw MissingInput("sequence " + std::to_string(sequence) + " has no frames");
  return batch;
}

TimingStats summarize(std::string method, std::vector<double> samples_ns) {
  if (samples_ns.empty()) throw InsufficientIterations("no samples for " + method);
  TimingStats t;
  t.method = std::move(method);
  t.iterations = static_cast<int>(samples_ns.size());
  t.mean_ns = std::accumulate(samples_ns.begin(), samples_ns.end(), 0.0) / static_cast<double>(samples_ns.size());
  std::sort(samples_ns.begin(), samples_ns.end());
  const std::size_t n = samples_ns.size();
  t.median_ns = n % 2 ? samples_ns[n / 2] : 0.5 * (samples_ns[n / 2 - 1] + samples_ns[n / 2]);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  t.p95_ns = samples_ns[std::max<std::size_t>(rank, 1) - 1];
  return t;
}

const TimingStats& BenchReport::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return m;
  throw InvalidArgument("no bench method " + name);
}

double BenchReport::ratio(const std::string& name) const {
  for (const auto& [k, v] : ratios)
    if (k == name) return v;
  throw InvalidArgument("no bench ratio " + name);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Row {
  std::string name;
  std::function<void()> body;
};

// Runs every row once per iteration, in order, so that drift affects all
// rows alike.
std::vector<TimingStats> run_rows(const std::vector<Row>& rows, const BenchConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<double>> samples(rows.size());
  for (int it = 0; it < cfg.warmup + cfg.iterations; ++it) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto start = Clock::now();
      rows[r].body();
      const double ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
      if (it >= cfg.warmup) samples[r].push_back(ns);
    }
  }
  std::vector<TimingStats> out;
  for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(summarize(rows[r].name, std::move(samples[r])));
  return out;
}

std::string hardware_note() {
  std::ostringstream s;
  s << std::thread::hardware_concurrency() << " hardware threads";
#if defined(__VERSION__)
  s << ", compiler " << __VERSION__;
#endif
  s << ", one iteration = one 6-camera batch";
  return s.str();
}

// Prevents the optimiser from discarding results.
volatile std::size_t g_sink = 0;

void check_batch(const BenchBatch& batch) {
  if (batch.current.empty() || batch.current.size() != batch.next.size())
    throw InvalidArgument("bench batch needs matching current and next frames");
}

std::size_t classify(const ModelParams<float>& model, const std::vector<GrayImage>& frames) {
  const auto& spec = model.spec;
  const int n = static_cast<int>(frames.size());
  Tensor<float> input({n, 1, spec.input_height, spec.input_width});
  const std::size_t stride = static_cast<std::size_t>(spec.input_height) * spec.input_width;
  for (int i = 0; i < n; ++i) to_input(frames[static_cast<std::size_t>(i)], spec, input.data() + i * stride);
  const auto probs = forward(model, input);
  return static_cast<std::size_t>(probs[1] > probs[0]);
}

std::size_t match_all(const std::vector<GrayImage>& frames, const std::vector<FeatureSet>& previous,
                      const OracleConfig& cfg, bool parallel) {
  std::vector<std::size_t> matched(frames.size(), 0);
  auto work = [&](std::size_t c) {
    matched[c] = match_features(previous[c], extract(frames[c], cfg.extract), cfg.max_match_distance).size();
  };
  if (parallel) {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < frames.size(); ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  } else {
    for (std::size_t c = 0; c < frames.size(); ++c) work(c);
  }
  return std::accumulate(matched.begin(), matched.end(), std::size_t{0});
}

std::size_t track(const BenchBatch& batch, std::size_t camera, const OracleConfig& cfg) {
  return static_cast<std::size_t>(count_good_features(batch.current[camera], batch.next[camera], cfg).good);
}

}  // namespace

BenchReport bench_quality_scoring(const BenchBatch& batch, const ModelParams<float>& model,
                                  const OracleConfig& oracle_cfg, const BenchConfig& cfg) {
  check_batch(batch);
  cfg.validate();
  oracle_cfg.validate();
  std::vector<FeatureSet> previous;
  for (const auto& f : batch.current) previous.push_back(extract(f, oracle_cfg.extract));

  std::vector<Row> rows{
      {"matcher_x6", [&] { g_sink = g_sink + match_all(batch.next, previous, oracle_cfg, false); }},
      {"classifier_x6", [&] { g_sink = g_sink + classify(model, batch.next); }},
  };
  if (cfg.parallel_extraction)
    rows.push_back({"matcher_x6_parallel", [&] { g_sink = g_sink + match_all(batch.next, previous, oracle_cfg, true); }});

  BenchReport report;
  report.methods = run_rows(rows, cfg);
  report.warmup = cfg.warmup;
  report.iterations = cfg.iterations;
  report.hardware_note = hardware_note();
  report.ratios.emplace_back("speedup", report.method("matcher_x6").median_ns / report.method("classifier_x6").median_ns);
  if (cfg.parallel_extraction)
    report.ratios.emplace_back("speedup_parallel",
                               report.method("matcher_x6_parallel").median_ns / report.method("classifier_x6").median_ns);
  return report;
}

BenchReport bench_pipeline_setups(const BenchBatch& batch, const ModelParams<float>& model,
                                  const OracleConfig& oracle_cfg, const BenchConfig& cfg) {
  check_batch(batch);
  cfg.validate();
  oracle_cfg.validate();
  const std::size_t cams = batch.current.size();
  std::vector<FeatureSet> previous;
  for (const auto& f : batch.current) previous.push_back(extract(f, oracle_cfg.extract));

  // Tracked cameras: the classifier's picks for this batch, fixed up front.
  const auto& spec = model.spec;
  Tensor<float> input({static_cast<int>(cams), 1, spec.input_height, spec.input_width});
  const std::size_t stride = static_cast<std::size_t>(spec.input_height) * spec.input_width;
  for (std::size_t c = 0; c < cams; ++c) to_input(batch.current[c], spec, input.data() + c * stride);
  const auto probs = forward(model, input);
  std::vector<double> scores;
  for (std::size_t c = 0; c < cams; ++c) scores.push_back(probs[2 * c + 1]);
  ArbitrationPolicy two;
  two.top_k = std::min<int>(2, static_cast<int>(cams));
  const auto picks = select_camera(scores, std::vector<bool>(cams, true), two);
  const auto first = static_cast<std::size_t>(picks.front());
  const auto second = static_cast<std::size_t>(picks.back());

  const std::vector<Row> rows{
      {"track_x1", [&] { g_sink = g_sink + track(batch, first, oracle_cfg); }},
      {"track_x6",
       [&] {
         for (std::size_t c = 0; c < cams; ++c) g_sink = g_sink + track(batch, c, oracle_cfg);
       }},
      {"track_x1+match_x6",
       [&] {
         g_sink = g_sink + match_all(batch.next, previous, oracle_cfg, false);
         g_sink = g_sink + track(batch, first, oracle_cfg);
       }},
      {"track_x1+classifier_x6",
       [&] {
         g_sink = g_sink + classify(model, batch.next);
         g_sink = g_sink + track(batch, first, oracle_cfg);
       }},
      {"track_x2+classifier_x6",
       [&] {
         g_sink = g_sink + classify(model, batch.next);
         g_sink = g_sink + track(batch, first, oracle_cfg) + track(batch, second, oracle_cfg);
       }},
  };
  BenchReport report;
  report.methods = run_rows(rows, cfg);
  report.warmup = cfg.warmup;
  report.iterations = cfg.iterations;
  report.hardware_note = hardware_note();
  const double base = report.method("track_x1").median_ns;
  for (const auto& m : report.methods)
    if (m.method != "track_x1") report.ratios.emplace_back(m.method + "/track_x1", m.median_ns / base);
  return report;
}

std::string format_table(const BenchReport& report) {
  std::ostringstream s;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %12s %12s %12s\n", "method", "mean ms", "median ms", "p95 ms");
  s << line;
  for (const auto& m : report.methods) {
    std::snprintf(line, sizeof line, "%-26s %12.3f %12.3f %12.3f\n", m.method.c_str(), m.mean_ns / 1e6,
                  m.median_ns / 1e6, m.p95_ns / 1e6);
    s << line;
  }
  for (const auto& [name, value] : report.ratios) {
    std::snprintf(line, sizeof line, "%-26s %12.3f\n", name.c_str(), value);
    s << line;
  }
  s << "iterations " << report.iterations << " after " << report.warmup << " warm-up; " << report.hardware_note
    << '\n';
  return s.str();
}

void write_report_jsonl(const BenchReport& report, const std::filesystem::path& path, bool append) {
  std::ofstream out(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& m : report.methods) {
    for (const auto& [stat, v] : {std::pair{"mean", m.mean_ns}, {"median", m.median_ns}, {"p95", m.p95_ns}})
      out << Json{{"method", m.method}, {"statistic", stat}, {"value_ns", v}}.dump() << '\n';
  }
}

}  // namespace camsel

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "camsel/arbitration.hpp"
#include "camsel/bench.hpp"
#include "camsel/checkpoint.hpp"
#include "camsel/labeling.hpp"
#include "camsel/synth.hpp"
#include "camsel/train.hpp"
#include "oracles.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace camsel;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict oracle_geometry() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Matrix3d f0 = oracles::random_rank2(rng);
    const auto f = eight_point(oracles::sample_on_constraint(f0, 20, rng));
    worst = std::max(worst, oracles::distance_up_to_sign(f.matrix(), f0));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 1.0, fmt("max Frobenius distance %.2e over 10 matrices, %.3f s", worst, secs)};
}

Verdict detector_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  int agree = 0;
  std::size_t corners = 0;
  for (int i = 0; i < 50; ++i) {
    const auto img = fixtures::random_image(64, 64, 5000 + i);
    std::vector<std::pair<int, int>> got;
    for (const auto& k : detect_fast(img, 20, 16)) got.emplace_back(static_cast<int>(k.x), static_cast<int>(k.y));
    const auto want = oracles::oracle_corners(img, 20, 16);
    agree += got == want;
    corners += want.size();
  }
  const double secs = seconds_since(t0);
  return {agree == 50 && secs < 10.0, fmt("%d/50 images identical (%zu corners), %.2f s", agree, corners, secs)};
}

Verdict gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed < 200; ++seed) {
    const auto p = oracles::toy_point(seed);
    const auto res = oracles::check_gradients(p.model, p.batch, p.labels, 1e-3);
    if (res.kink_crossings > 0) continue;
    const double secs = seconds_since(t0);
    return {res.max_relative_error <= 1e-3 && secs < 30.0,
            fmt("%zu parameters, max relative error %.2e at h=1e-3 (seed %llu), %.2f s", res.parameters,
                res.max_relative_error, static_cast<unsigned long long>(seed), secs)};
  }
  return {false, "no kink-free evaluation point found"};
}

struct Dataset {
  fs::path root;
  std::vector<FrameRecord> manifest;
  SceneSpec base;
  DatasetPlan plan;
  ModelParams<float> model;
};

Verdict classifier_accuracy(Dataset& d) {
  const auto t0 = std::chrono::steady_clock::now();
  d.manifest = generate_dataset(plan_scenes(d.base, d.plan), d.root).manifest;
  std::vector<FrameRecord> labelled;
  for (int s : {1, 2, 3}) {
    const auto part = select_sequence(d.manifest, s);
    labelled.insert(labelled.end(), part.begin(), part.end());
  }
  const auto labels = label_sequence(labelled, d.root, OracleConfig{});
  const auto [train_set, eval_set] = split_by_sequence(labels, d.plan.train_sequences, d.plan.eval_sequences);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.seed = d.base.seed;
  d.model = train(train_set, d.root, ModelSpec{}, cfg).params;
  const auto report = evaluate(d.model, eval_set, d.root);
  const double secs = seconds_since(t0);
  int good = 0;
  for (const auto& l : eval_set.labels) good += l.good;
  const double share = static_cast<double>(good) / static_cast<double>(eval_set.labels.size());
  const double accuracy = report.overall.accuracy();
  const bool ok = eval_set.labels.size() >= 600 && share >= 0.35 && share <= 0.65 && accuracy >= 0.90 &&
                  report.macro_f1 >= 0.90 && secs <= 300.0;
  return {ok, fmt("eval accuracy %.3f, macro F1 %.3f on %zu frames (%.0f%% good), train %zu frames, "
                  "8 epochs batch 32, %.0f s",
                  accuracy, report.macro_f1, eval_set.labels.size(), 100.0 * share, train_set.labels.size(), secs)};
}

Verdict switch_to_best(const Dataset& d) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto frames = select_sequence(d.manifest, d.plan.arbitration_sequence);
  const auto reports = frame_reports(frames, d.root, OracleConfig{});
  const std::int64_t period = d.base.period_ns();
  const auto nn = run_pipeline(frames, classifier_scorer(d.model, d.root), {}, reports, period);
  const auto best =
      run_pipeline(frames, oracle_scorer(reports, OracleConfig{}.extract.max_features), {}, reports, period);
  const double secs = seconds_since(t0);
  return {nn.ratio() >= 1.5 && best.ratio() >= nn.ratio() && secs <= 180.0,
          fmt("selected %.1f vs all-camera %.1f good features (ratio %.2f); oracle-as-scorer ratio %.2f; "
              "%d batches, %.0f s",
              nn.selected_mean, nn.all_camera_mean, nn.ratio(), best.ratio(), nn.evaluated_batches, secs)};
}

Verdict speedup(const BenchReport& r) {
  const double s = r.ratio("speedup");
  return {s >= 3.0 && r.iterations >= 100 && r.warmup >= 30,
          fmt("extract+match x6 median %.2f ms, classifier x6 median %.2f ms, speedup %.2fx over %d iterations",
              r.method("matcher_x6").median_ns / 1e6, r.method("classifier_x6").median_ns / 1e6, s, r.iterations)};
}

Verdict pipeline_overhead(const BenchReport& r) {
  const double one = r.method("track_x1").median_ns, cls = r.method("track_x1+classifier_x6").median_ns;
  const double match = r.method("track_x1+match_x6").median_ns, six = r.method("track_x6").median_ns;
  const bool ordered = one < cls && cls < match && match < six;
  return {cls <= 1.35 * one && ordered && r.iterations >= 100,
          fmt("track+classifier / track = %.3f; medians %.1f < %.1f < %.1f < %.1f ms %s", cls / one, one / 1e6,
              cls / 1e6, match / 1e6, six / 1e6, ordered ? "(ordered)" : "(ORDER VIOLATED)")};
}

Verdict determinism(const fs::path& work) {
  SceneSpec s;
  s.frames_per_camera = 21;
  s.seed = 77;
  s.schedule.kind = DensitySchedule::Kind::Balanced;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  cfg.seed = 77;
  std::vector<std::string> files[2];
  for (int run = 0; run < 2; ++run) {
    const auto dir = work / ("det" + std::to_string(run));
    fs::remove_all(dir);
    const auto manifest = generate_dataset({s}, dir).manifest;
    const auto labels = label_sequence(manifest, dir, OracleConfig{});
    write_labels(labels, dir / "labels.jsonl");
    const auto trained = train(labels, dir, ModelSpec{}, cfg);
    write_history(trained.history, dir / "history.jsonl");
    save_checkpoint(trained.params, dir / "model.ckpt");
    const auto model = load_checkpoint(dir / "model.ckpt");
    const auto reports = frame_reports(manifest, dir, OracleConfig{});
    const auto r = run_pipeline(manifest, classifier_scorer(model, dir), {0.05, 1}, reports, s.period_ns());
    write_trace(r.trace, dir / "trace.jsonl");
    for (const char* f : {"manifest.csv", "labels.jsonl", "history.jsonl", "model.ckpt", "trace.jsonl"})
      files[run].push_back(slurp(dir / f));
  }
  const char* names[] = {"manifest", "labels", "history", "checkpoint", "trace"};
  std::string differing;
  for (std::size_t i = 0; i < files[0].size(); ++i)
    if (files[0][i] != files[1][i] || files[0][i].empty()) differing += std::string(" ") + names[i];
  return {differing.empty(), differing.empty() ? "manifest, labels, history, checkpoint and trace byte-identical "
                                                 "across two seeded runs"
                                               : "differs:" + differing};
}

Verdict invariants() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& o : properties::invariant_suite(1000, 9090)) {
    ok = ok && o.passed() && o.cases >= 1000;
    detail += fmt("%s: %d cases, %d/%d checks; ", o.name.c_str(), o.cases, o.checks - o.failures, o.checks);
    if (!o.passed()) detail += "first failure " + o.first_failure + "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs <= 120.0;
  return {ok, detail + fmt("%.1f s", secs)};
}

}  // namespace

int main() {
  const fs::path work = fixtures::scratch_dir("acceptance");
  int failed = 0;
  auto report = [&](int n, const char* name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "oracle geometry", oracle_geometry);
  report(2, "detector equivalence", detector_equivalence);
  report(3, "gradient check", gradient_check);

  Dataset d;
  d.root = work / "dataset";
  d.base.seed = 1;
  report(4, "classifier accuracy", [&] { return classifier_accuracy(d); });
  report(5, "switch-to-best ratio", [&] { return switch_to_best(d); });

  std::optional<BenchReport> quality, setups;
  auto bench = [&](bool pipeline) -> const BenchReport& {
    if (!quality) {
      const auto batch = load_bench_batch(d.manifest, d.root, d.plan.arbitration_sequence, 0);
      const BenchConfig cfg{30, 100};
      quality = bench_quality_scoring(batch, d.model, OracleConfig{}, cfg);
      setups = bench_pipeline_setups(batch, d.model, OracleConfig{}, cfg);
    }
    return pipeline ? *setups : *quality;
  };
  report(6, "speedup ratio", [&] { return speedup(bench(false)); });
  report(7, "pipeline overhead", [&] { return pipeline_overhead(bench(true)); });
  report(8, "determinism", [&] { return determinism(work); });
  report(9, "invariants", invariants);

  std::printf("%d/9 criteria passed\n", 9 - failed);
  return failed ? 1 : 0;
}

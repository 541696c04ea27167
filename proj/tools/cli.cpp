#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "CLI11.hpp"
#include "camsel/arbitration.hpp"
#include "camsel/bench.hpp"
#include "camsel/checkpoint.hpp"
#include "camsel/labeling.hpp"
#include "camsel/run_config.hpp"
#include "camsel/synth.hpp"
#include "camsel/train.hpp"

namespace camsel::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::string& category) {
  static const std::map<std::string, int> codes{
      {"config-parse", 2},
      {"missing-input", 3},
      {"unreadable-image", 4},
      {"manifest", 5},
      {"io", 6},
      {"corrupt-checkpoint", 7},
      {"invalid-spec", 8},
      {"invalid-argument", 9},
      {"split-overlap", 10},
      {"empty-dataset", 11},
      {"insufficient-iterations", 12},
      {"no-candidate", 13},
      {"shape-mismatch", 14},
      {"dimension-underflow", 15},
      {"out-of-bounds", 16},
      {"degenerate-configuration", 17},
  };
  const auto it = codes.find(category);
  return it == codes.end() ? 70 : it->second;
}

namespace {

// Flag values; unset ones leave the config file's value alone.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, manifest, checkpoint, labels;
  std::optional<int> threshold, cameras, top_k, iterations, sequence;
  std::optional<double> hysteresis;
  std::optional<std::vector<int>> train_sequences, eval_sequences;
  bool parallel = false;
};

void add_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON run configuration");
  sub->add_option("--seed", o.seed, "global seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--manifest", o.manifest, "manifest CSV");
  sub->add_option("--checkpoint", o.checkpoint, "model checkpoint path");
  sub->add_option("--labels", o.labels, "label file path");
  sub->add_option("--threshold", o.threshold, "good-feature threshold");
  sub->add_option("--cameras", o.cameras, "cameras per synthetic sequence");
  sub->add_option("--top-k", o.top_k, "cameras selected per batch");
  sub->add_option("--hysteresis", o.hysteresis, "hysteresis margin");
  sub->add_option("--iterations", o.iterations, "measured bench iterations");
  sub->add_option("--sequence", o.sequence, "sequence for arbitrate and bench");
  sub->add_option("--train-sequences", o.train_sequences, "training sequence numbers")->delimiter(',');
  sub->add_option("--eval-sequences", o.eval_sequences, "evaluation sequence numbers")->delimiter(',');
  sub->add_flag("--parallel", o.parallel, "also time threaded per-camera extraction");
}

RunConfig resolve(const std::string& subcommand, const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  c.subcommand = subcommand;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.manifest) c.manifest = *o.manifest;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  if (o.labels) c.labels = *o.labels;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.cameras) c.scene.num_cameras = *o.cameras;
  if (o.top_k) c.policy.top_k = *o.top_k;
  if (o.hysteresis) c.policy.hysteresis_margin = *o.hysteresis;
  if (o.iterations) c.bench.iterations = *o.iterations;
  if (o.sequence) c.sequence = *o.sequence;
  if (o.train_sequences) c.dataset.train_sequences = *o.train_sequences;
  if (o.eval_sequences) c.dataset.eval_sequences = *o.eval_sequences;
  if (o.parallel) c.bench.parallel_extraction = true;
  c.resolve();
  return c;
}

void require_manifest(const RunConfig& c) {
  if (c.manifest.empty()) throw MissingInput("--manifest is required");
  if (!fs::exists(c.manifest)) throw MissingInput("manifest not found: " + c.manifest);
}

fs::path root_of(const RunConfig& c) { return fs::path(c.manifest).parent_path(); }

void write_json(const Json& j, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  fs::create_directories(c.out);
  const auto scenes = plan_scenes(c.scene, c.dataset);
  const auto gen = generate_dataset(scenes, c.out);
  out << "wrote " << gen.manifest.size() << " frames in " << scenes.size() << " sequences to "
      << (fs::path(c.out) / "manifest.csv").string() << '\n';
  return 0;
}

int cmd_label(const RunConfig& c, std::ostream& out) {
  require_manifest(c);
  const auto labels = label_sequence(read_manifest(c.manifest), root_of(c), c.oracle, c.threshold);
  fs::create_directories(c.out);
  write_labels(labels, c.labels);
  const auto h = compute_histogram(labels, c.histogram_bins);
  int good = 0;
  for (const auto& l : labels.labels) good += l.good;
  write_json({{"bin_edges", h.bin_edges},
              {"frequencies", h.frequencies},
              {"mean", h.mean},
              {"median", h.median},
              {"labels", labels.labels.size()},
              {"good", good}},
             fs::path(c.out) / "histogram.json");
  out << "labeled " << labels.labels.size() << " frames, " << good << " good; mean good count " << h.mean
      << ", median " << h.median << '\n';
  for (std::size_t i = 0; i < h.frequencies.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "[%8.1f, %8.1f) %d\n", h.bin_edges[i], h.bin_edges[i + 1], h.frequencies[i]);
    out << line;
  }
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  require_manifest(c);
  const auto [train_set, eval_set] = split_by_sequence(read_labels(c.labels), c.dataset.train_sequences,
                                                       c.dataset.eval_sequences);
  const auto result = train(train_set, root_of(c), c.model, c.train);
  fs::create_directories(c.out);
  save_checkpoint(result.params, c.checkpoint);
  write_history(result.history, fs::path(c.out) / "history.jsonl");
  for (const auto& e : result.history) out << "epoch " << e.epoch << " mean loss " << e.mean_loss << " (" << e.wall_ms << " ms)\n";
  out << "trained on " << train_set.labels.size() << " frames; checkpoint " << c.checkpoint << '\n';
  return 0;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  require_manifest(c);
  const auto model = load_checkpoint(c.checkpoint);
  const auto eval_set = split_by_sequence(read_labels(c.labels), {}, c.dataset.eval_sequences).second;
  const auto report = evaluate(model, eval_set, root_of(c));
  char line[96];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", "camera", "frames", "accuracy", "F1");
  out << line;
  Json cams = Json::array();
  for (const auto& m : report.per_camera) {
    std::snprintf(line, sizeof line, "%-10d %8d %8.3f %8.3f\n", m.camera_id, m.counts.total(), m.counts.accuracy(),
                  m.counts.f1());
    out << line;
    cams.push_back({{"camera_id", m.camera_id},
                    {"frames", m.counts.total()},
                    {"accuracy", m.counts.accuracy()},
                    {"f1", m.counts.f1()},
                    {"tp", m.counts.tp},
                    {"tn", m.counts.tn},
                    {"fp", m.counts.fp},
                    {"fn", m.counts.fn}});
  }
  std::snprintf(line, sizeof line, "%-10s %8d %8.3f %8.3f\n", "average", report.overall.total(),
                report.macro_accuracy, report.macro_f1);
  out << line;
  fs::create_directories(c.out);
  write_json({{"per_camera", cams}, {"macro_accuracy", report.macro_accuracy}, {"macro_f1", report.macro_f1}},
             fs::path(c.out) / "eval.json");
  return 0;
}

std::vector<FrameRecord> sequence_frames(const RunConfig& c) {
  auto frames = select_sequence(read_manifest(c.manifest), *c.sequence);
  if (frames.empty()) throw MissingInput("manifest has no frames for sequence " + std::to_string(*c.sequence));
  return frames;
}

int cmd_arbitrate(const RunConfig& c, std::ostream& out) {
  require_manifest(c);
  const auto model = load_checkpoint(c.checkpoint);
  const auto frames = sequence_frames(c);
  const auto root = root_of(c);
  const auto reports = frame_reports(frames, root, c.oracle);
  const std::int64_t period = c.scene.period_ns();
  const auto nn = run_pipeline(frames, classifier_scorer(model, root), c.policy, reports, period);
  const auto oracle = run_pipeline(frames, oracle_scorer(reports, c.oracle.extract.max_features), c.policy, reports, period);
  fs::create_directories(c.out);
  write_trace(nn.trace, fs::path(c.out) / "trace.jsonl");
  write_json({{"sequence", *c.sequence},
              {"batches", nn.trace.records.size()},
              {"evaluated_batches", nn.evaluated_batches},
              {"switches", nn.trace.switch_count()},
              {"selected_mean", nn.selected_mean},
              {"all_camera_mean", nn.all_camera_mean},
              {"ratio", nn.ratio()},
              {"oracle_selected_mean", oracle.selected_mean},
              {"oracle_ratio", oracle.ratio()}},
             fs::path(c.out) / "arbitration.json");
  out << "selected stream mean good " << nn.selected_mean << " vs all-camera mean " << nn.all_camera_mean
      << " (ratio " << nn.ratio() << ", " << nn.trace.switch_count() << " switches)\n"
      << "oracle-as-scorer ratio " << oracle.ratio() << '\n';
  return 0;
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
  require_manifest(c);
  c.bench.validate();
  const auto model = load_checkpoint(c.checkpoint);
  const auto batch = load_bench_batch(read_manifest(c.manifest), root_of(c), *c.sequence, c.bench_frame);
  const auto quality = bench_quality_scoring(batch, model, c.oracle, c.bench);
  const auto setups = bench_pipeline_setups(batch, model, c.oracle, c.bench);
  const std::string table = format_table(quality) + '\n' + format_table(setups);
  out << table;
  fs::create_directories(c.out);
  std::ofstream(fs::path(c.out) / "bench.txt", std::ios::binary) << table;
  write_report_jsonl(quality, fs::path(c.out) / "bench.jsonl");
  write_report_jsonl(setups, fs::path(c.out) / "bench.jsonl", true);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"camsel: good-feature labeling, camera classifier and arbitration", "camsel"};
  app.require_subcommand(1);
  Overrides o;
  using Handler = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"synth", "generate the synthetic dataset", cmd_synth},
      {"label", "label frames by good-feature count", cmd_label},
      {"train", "train the classifier", cmd_train},
      {"eval", "evaluate the classifier per camera", cmd_eval},
      {"arbitrate", "select the best camera per batch", cmd_arbitrate},
      {"bench", "time classifier scoring against extract+match", cmd_bench},
  };
  for (const auto& [name, help, fn] : commands) add_flags(app.add_subcommand(name, help), o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;
    err << "error: config-parse: " << e.what() << '\n';
    return exit_code_for("config-parse");
  }

  try {
    for (const auto& [name, help, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      const RunConfig c = resolve(name, o);
      out << to_json(c).dump(2) << '\n';
      return fn(c, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.category() << ": " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return exit_code_for("internal");
  }
  return 0;
}

}  // namespace camsel::cli

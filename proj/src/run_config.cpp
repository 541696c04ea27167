#include "camsel/run_config.hpp"

#include <fstream>

namespace camsel {

void RunConfig::resolve() {
  scene.seed = seed;
  train.seed = seed;
  if (out.empty() && !manifest.empty()) out = std::filesystem::path(manifest).parent_path().string();
  if (out.empty()) out = ".";
  const std::filesystem::path dir(out);
  if (labels.empty()) labels = (dir / "labels.jsonl").string();
  if (checkpoint.empty()) checkpoint = (dir / "model.ckpt").string();
  if (!sequence) sequence = dataset.arbitration_sequence;
}

Json to_json(const RunConfig& c) {
  Json j{{"subcommand", c.subcommand},
         {"seed", c.seed},
         {"manifest", c.manifest},
         {"out", c.out},
         {"checkpoint", c.checkpoint},
         {"labels", c.labels}};
  j["sequence"] = c.sequence ? Json(*c.sequence) : Json(nullptr);
  j["threshold"] = c.threshold;
  j["histogram_bins"] = c.histogram_bins;
  j["bench_frame"] = c.bench_frame;
  j["oracle"] = to_json(c.oracle);
  j["train"] = to_json(c.train);
  j["model"] = to_json(c.model);
  j["policy"] = to_json(c.policy);
  j["scene"] = to_json(c.scene);
  j["dataset"] = {{"train_sequences", c.dataset.train_sequences},
                  {"eval_sequences", c.dataset.eval_sequences},
                  {"arbitration_sequence", c.dataset.arbitration_sequence}};
  j["bench"] = to_json(c.bench);
  return j;
}

void parse(const Json& j, RunConfig& c, const std::string& context) {
  JsonReader(j, context)
      .get("subcommand", c.subcommand)
      .get("seed", c.seed)
      .get("manifest", c.manifest)
      .get("out", c.out)
      .get("checkpoint", c.checkpoint)
      .get("labels", c.labels)
      .get_with("sequence", c.sequence,
                [](const Json& v, std::optional<int>& out, const std::string& ctx) {
                  if (v.is_null()) out.reset();
                  else if (v.is_number_integer()) out = v.get<int>();
                  else throw ConfigError(ctx + ": expected an integer or null");
                })
      .get("threshold", c.threshold)
      .get("histogram_bins", c.histogram_bins)
      .get("bench_frame", c.bench_frame)
      .get_with("oracle", c.oracle, [](const Json& v, OracleConfig& o, const std::string& ctx) { parse(v, o, ctx); })
      .get_with("train", c.train, [](const Json& v, TrainConfig& o, const std::string& ctx) { parse(v, o, ctx); })
      .get_with("model", c.model, [](const Json& v, ModelSpec& o, const std::string& ctx) { parse(v, o, ctx); })
      .get_with("policy", c.policy, [](const Json& v, ArbitrationPolicy& o, const std::string& ctx) { parse(v, o, ctx); })
      .get_with("scene", c.scene, [](const Json& v, SceneSpec& o, const std::string& ctx) { parse(v, o, ctx); })
      .get_with("dataset", c.dataset,
                [](const Json& v, DatasetPlan& o, const std::string& ctx) {
                  JsonReader(v, ctx)
                      .get("train_sequences", o.train_sequences)
                      .get("eval_sequences", o.eval_sequences)
                      .get("arbitration_sequence", o.arbitration_sequence)
                      .finish();
                })
      .get_with("bench", c.bench, [](const Json& v, BenchConfig& o, const std::string& ctx) { parse(v, o, ctx); })
      .finish();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInput("config file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  RunConfig c;
  try {
    parse(Json::parse(in), c);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace camsel

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "camsel/json_io.hpp"
#include "camsel/labeling.hpp"

namespace camsel {

/// Everything a CLI run needs. Loaded from one JSON file, then overridden by
/// flags; the resolved form is echoed before any work starts.
struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 1;  // copied into scene.seed and train.seed on resolve

  std::string manifest;
  std::string out;
  std::string checkpoint;
  std::string labels;
  std::optional<int> sequence;  // arbitrate / bench; defaults to the plan's arbitration sequence

  int threshold = kDefaultThreshold;
  int histogram_bins = 20;
  int bench_frame = 0;

  OracleConfig oracle;
  TrainConfig train;
  ModelSpec model;
  ArbitrationPolicy policy;
  SceneSpec scene;
  DatasetPlan dataset;
  BenchConfig bench;

  /// Applies the global seed and fills default paths relative to `out` /
  /// the manifest directory.
  void resolve();
};

Json to_json(const RunConfig& c);
void parse(const Json& j, RunConfig& c, const std::string& context = "config");
/// Throws MissingInput when absent, ConfigError when malformed.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace camsel

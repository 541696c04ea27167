#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "camsel/checkpoint.hpp"
#include "camsel/run_config.hpp"
#include "cli.hpp"
#include "support.hpp"

using namespace camsel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run camsel_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The resolved configuration is the first JSON document on stdout.
Json echoed_config(const std::string& out) {
  const auto end = out.find("\n}\n");
  return Json::parse(out.substr(0, end + 2));
}

// A tiny end-to-end configuration: two 160x120 cameras, toy model.
fs::path small_config(const fs::path& dir) {
  RunConfig c;
  c.scene.num_cameras = 2;
  c.scene.frames_per_camera = 8;
  c.scene.width = 160;
  c.scene.height = 120;
  c.scene.window_length = 4;
  c.model = ModelSpec::toy();
  c.train.epochs = 1;
  c.train.batch_size = 4;
  c.bench.iterations = 2;
  Json j = to_json(c);
  j.erase("subcommand");
  j.erase("out");
  j.erase("manifest");
  j.erase("labels");
  j.erase("checkpoint");
  j.erase("sequence");
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fixtures::scratch_dir("cli_flow"));
    config_ = new fs::path(small_config(*dir_));
    const auto r = camsel_run({"synth", "--config", config_->string(), "--out", (*dir_ / "data").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    delete config_;
  }
  static std::vector<std::string> base(const std::string& cmd) {
    return {cmd, "--config", config_->string(), "--manifest", (*dir_ / "data" / "manifest.csv").string()};
  }
  static fs::path* dir_;
  static fs::path* config_;
};

fs::path* CliFlow::dir_ = nullptr;
fs::path* CliFlow::config_ = nullptr;

}  // namespace

TEST(Cli, ExitCodesAreDistinct) {
  std::set<int> codes;
  for (const char* c : {"config-parse", "missing-input", "unreadable-image", "manifest", "io", "corrupt-checkpoint",
                        "invalid-spec", "invalid-argument", "split-overlap", "empty-dataset",
                        "insufficient-iterations", "no-candidate", "shape-mismatch", "dimension-underflow",
                        "out-of-bounds", "degenerate-configuration"}) {
    const int code = cli::exit_code_for(c);
    EXPECT_GT(code, 1);
    EXPECT_NE(code, 70);
    EXPECT_TRUE(codes.insert(code).second) << c;
  }
  EXPECT_EQ(cli::exit_code_for("whatever"), 70);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(camsel_run({"--help"}).code, 0);
  EXPECT_EQ(camsel_run({}).code, 2);
  EXPECT_EQ(camsel_run({"fly"}).code, 2);
  EXPECT_EQ(camsel_run({"label", "--no-such-flag"}).code, 2);
  EXPECT_EQ(camsel_run({"label", "--threshold", "many"}).code, 2);
}

TEST(Cli, MissingInputs) {
  const auto dir = fixtures::scratch_dir("cli_missing");
  auto r = camsel_run({"label", "--manifest", (dir / "absent.csv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing-input"), std::string::npos);
  EXPECT_EQ(camsel_run({"label"}).code, 3);
  EXPECT_EQ(camsel_run({"label", "--config", (dir / "absent.json").string()}).code, 3);
}

TEST(Cli, ConfigErrors) {
  const auto dir = fixtures::scratch_dir("cli_config");
  std::ofstream(dir / "unknown.json") << R"({"train":{"batch_size":32,"momentum":0.5}})";
  auto r = camsel_run({"train", "--config", (dir / "unknown.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("momentum"), std::string::npos);
  std::ofstream(dir / "broken.json") << "{\"train\": ";
  EXPECT_EQ(camsel_run({"train", "--config", (dir / "broken.json").string()}).code, 2);
  std::ofstream(dir / "type.json") << R"({"threshold":"high"})";
  EXPECT_EQ(camsel_run({"label", "--config", (dir / "type.json").string()}).code, 2);
}

TEST(Cli, PartialConfigAndFlagOverrides) {
  const auto dir = fixtures::scratch_dir("cli_override");
  std::ofstream(dir / "c.json") << R"({"train":{"batch_size":32},"threshold":300})";
  const auto r = camsel_run({"label", "--config", (dir / "c.json").string(), "--threshold", "320", "--seed", "9",
                             "--manifest", (dir / "absent.csv").string()});
  EXPECT_EQ(r.code, 3);
  const auto j = echoed_config(r.out);
  EXPECT_EQ(j["train"]["batch_size"], 32);
  EXPECT_EQ(j["train"]["learning_rate"], 0.001);
  EXPECT_EQ(j["threshold"], 320);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["scene"]["seed"], 9);
  EXPECT_EQ(j["train"]["seed"], 9);
}

TEST_F(CliFlow, LabelTwiceIsByteIdentical) {
  auto args = base("label");
  args.insert(args.end(), {"--out", (*dir_ / "l1").string()});
  const auto a = camsel_run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  args.back() = (*dir_ / "l2").string();
  ASSERT_EQ(camsel_run(args).code, 0);
  EXPECT_EQ(slurp(*dir_ / "l1" / "labels.jsonl"), slurp(*dir_ / "l2" / "labels.jsonl"));
  EXPECT_EQ(slurp(*dir_ / "l1" / "histogram.json"), slurp(*dir_ / "l2" / "histogram.json"));
  // 4 sequences x 2 cameras x 7 labelled frames.
  EXPECT_EQ(read_labels(*dir_ / "l1" / "labels.jsonl").labels.size(), 56u);

  // Re-running from the echoed configuration reproduces the run.
  std::ofstream(*dir_ / "echo.json") << echoed_config(a.out).dump(2);
  const auto b = camsel_run({"label", "--config", (*dir_ / "echo.json").string(), "--out", (*dir_ / "l3").string(),
                             "--labels", (*dir_ / "l3" / "labels.jsonl").string()});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(*dir_ / "l1" / "labels.jsonl"), slurp(*dir_ / "l3" / "labels.jsonl"));
  auto ja = echoed_config(a.out), jb = echoed_config(b.out);
  for (auto* j : {&ja, &jb}) {
    j->erase("out");
    j->erase("labels");
  }
  EXPECT_EQ(ja, jb);
}

TEST_F(CliFlow, TrainEvalArbitrateBench) {
  const auto out = (*dir_ / "run").string();
  auto with_out = [&](const std::string& cmd) {
    auto a = base(cmd);
    a.insert(a.end(), {"--out", out});
    return a;
  };
  for (const char* cmd : {"label", "train", "eval", "arbitrate", "bench"}) {
    const auto r = camsel_run(with_out(cmd));
    ASSERT_EQ(r.code, 0) << cmd << ": " << r.err;
  }
  for (const char* f : {"labels.jsonl", "histogram.json", "model.ckpt", "history.jsonl", "eval.json", "trace.jsonl",
                        "arbitration.json", "bench.txt", "bench.jsonl"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  EXPECT_EQ(load_checkpoint(fs::path(out) / "model.ckpt").spec, ModelSpec::toy());
  const auto arb = Json::parse(slurp(fs::path(out) / "arbitration.json"));
  EXPECT_EQ(arb["sequence"], 4);
  EXPECT_GE(arb["oracle_ratio"].get<double>(), 1.0);

  // Bad inputs on the same run directory.
  std::ofstream(fs::path(out) / "junk.ckpt") << "junk";
  auto bad = with_out("eval");
  bad.insert(bad.end(), {"--checkpoint", (fs::path(out) / "junk.ckpt").string()});
  EXPECT_EQ(camsel_run(bad).code, 7);
  auto overlap = with_out("train");
  overlap.insert(overlap.end(), {"--train-sequences", "1,2", "--eval-sequences", "2"});
  EXPECT_EQ(camsel_run(overlap).code, 10);
  auto few = with_out("bench");
  few.insert(few.end(), {"--iterations", "0"});
  EXPECT_EQ(camsel_run(few).code, 12);
  auto absent = with_out("arbitrate");
  absent.insert(absent.end(), {"--sequence", "9"});
  EXPECT_EQ(camsel_run(absent).code, 3);
}

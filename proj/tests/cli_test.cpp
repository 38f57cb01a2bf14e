//
// Copyright 2026 The Taxo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "taxo/cli/run.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "test_support.hpp"

namespace taxo {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::TempDir;
using testing::write_text;

struct CliResult {
  int code;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "taxo");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream err, out;
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  int code = cli::main(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old_err);
  std::cout.rdbuf(old_out);
  return {code, err.str()};
}

fs::path toy(const std::string& name) { return testing::source_dir() / "data" / "toy" / name; }

// Config for the toy English binary run, with absolute data paths.
std::string binary_config(const std::string& extra = "") {
  return "task = binary\nlanguage = en\nseed = 13\n"
         "train_file = " + toy("train_en.tsv").string() + "\n"
         "complex_patterns = " + toy("complex_patterns_en.txt").string() + "\n"
         "dev_fraction = 0.3\nnoun_threshold = 0.12\n"
         "fill.lexicon = " + toy("fill_lexicon.tsv").string() + "\n"
         "translator = dictionary\n"
         "translator.dictionary = " + toy("dictionary.tsv").string() + "\n"
         "peer_file.fr = " + toy("train_fr.tsv").string() + "\n" + extra;
}

struct CliRun {
  TempDir tmp;
  fs::path config;
  fs::path dir;

  explicit CliRun(const std::string& text) : config(tmp / "run.conf"), dir(tmp / "run") {
    write_text(config, text);
  }
  CliResult operator()(const std::string& command, std::vector<std::string> more = {}) const {
    std::vector<std::string> args = {command, "--config", config.string(), "--run-dir", dir.string()};
    args.insert(args.end(), more.begin(), more.end());
    return run_cli(args);
  }
};

std::size_t data_rows(const fs::path& file) {
  std::istringstream in(read_text(file));
  std::size_t rows = 0;
  bool header = false;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

TEST(Cli, ConfigErrorsExitTwo) {
  CliRun unknown(binary_config("unknown_key = 1\n"));
  CliResult r = unknown("prepare");
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("unknown_key"), std::string::npos);
  EXPECT_FALSE(fs::exists(unknown.dir));

  CliRun bad_fraction(binary_config("dev_fraction = 1.5\n"));
  EXPECT_EQ(bad_fraction("prepare").code, cli::kExitConfig);
  EXPECT_EQ(run_cli({"prepare"}).code, cli::kExitConfig);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent/run.conf"}).code, cli::kExitConfig);

  CliRun strategy(binary_config());
  EXPECT_EQ(strategy("train", {"--strategy", "three_stage"}).code, cli::kExitConfig);
}

TEST(Cli, MissingUpstreamArtifactNamesCommand) {
  CliRun run(binary_config());
  CliResult r = run("augment");
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("dev.tsv"), std::string::npos);
  EXPECT_NE(r.err.find("taxo prepare"), std::string::npos);
  EXPECT_FALSE(fs::exists(run.dir / "nlpaug.tsv"));
}

TEST(Cli, OverwriteProtection) {
  CliRun run(binary_config());
  ASSERT_EQ(run("prepare").code, 0);
  const std::string before = read_text(run.dir / "dev.tsv");
  CliResult again = run("prepare");
  EXPECT_EQ(again.code, cli::kExitConfig);
  EXPECT_NE(again.err.find("--overwrite"), std::string::npos);
  EXPECT_EQ(run("prepare", {"--overwrite"}).code, 0);
  EXPECT_EQ(read_text(run.dir / "dev.tsv"), before);
  // A different config against the same directory is refused.
  EXPECT_EQ(run("augment", {"--seed", "14"}).code, cli::kExitConfig);
}

TEST(Cli, EvaluateLengthMismatchExitsThree) {
  CliRun run(binary_config());
  ASSERT_EQ(run("prepare").code, 0);
  write_text(run.dir / "predictions.tsv", "ID\tSentence\tprediction\tgold\n1\tx\t1\t1\n");
  CliResult r = run("evaluate");
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("rows"), std::string::npos);
  EXPECT_FALSE(fs::exists(run.dir / "metrics_en.tsv"));
}

TEST(Cli, MissingTranslationKeyExitsFourWithoutArtifacts) {
  ::unsetenv("TAXO_TEST_MISSING_KEY");
  CliRun run(binary_config());
  ASSERT_EQ(run("prepare").code, 0);
  std::string text = read_text(run.config);
  text.replace(text.find("translator = dictionary"), 23, "translator = http");
  write_text(run.config,
             text + "translator.endpoint = http://127.0.0.1:9/v2\ntranslator.key_env = TAXO_TEST_MISSING_KEY\n");
  CliResult r = run("augment", {"--overwrite"});
  EXPECT_EQ(r.code, cli::kExitProvider);
  EXPECT_NE(r.err.find("TAXO_TEST_MISSING_KEY"), std::string::npos);
  EXPECT_FALSE(fs::exists(run.dir / "nlpaug.tsv"));
  EXPECT_FALSE(fs::exists(run.dir / "translated_fr.tsv"));
  EXPECT_FALSE(fs::exists(run.dir / "augment_summary.tsv"));
}

TEST(Cli, IdentityTranslationIsFullyDeduplicated) {
  // The "French" peer is the English training file itself.
  CliRun run("task = binary\nlanguage = en\nseed = 3\n"
          "train_file = " + toy("train_en.tsv").string() + "\n"
          "fill.lexicon = " + toy("fill_lexicon.tsv").string() + "\n"
          "translator = identity\n"
          "peer_file.fr = " + toy("train_en.tsv").string() + "\n");
  ASSERT_EQ(run("prepare").code, 0);
  ASSERT_EQ(run("augment").code, 0);
  EXPECT_EQ(data_rows(run.dir / "translated_fr.tsv"), 0u);
  std::string summary = read_text(run.dir / "augment_summary.tsv");
  EXPECT_NE(summary.find("translated_fr\tfr\t0\t0\t0\t0\t120\t120\t100.00"), std::string::npos) << summary;
}

TEST(Cli, AugmentRowCount) {
  // 20 examples, 12 positive; a 0.5 stratified split gives a dev set of 10
  // with 6 positives, which yields 10 inserts and 6 substitutions.
  TempDir data;
  std::string train = "ID\tSentence\tLabels\n";
  for (int i = 0; i < 20; ++i) {
    bool pos = i < 12;
    train += std::to_string(i) + "\tI like apple" + std::to_string(i) +
             (pos ? ", a special kind of fruit.\t1\n" : " more than fruit.\t0\n");
  }
  write_text(data / "train.tsv", train);
  CliRun run("task = binary\nlanguage = en\nseed = 5\ndev_fraction = 0.5\n"
          "train_file = " + (data / "train.tsv").string() + "\n"
          "fill.lexicon = " + toy("fill_lexicon.tsv").string() + "\n");
  ASSERT_EQ(run("prepare").code, 0);
  Corpus dev = load_task_file(run.dir / "dev.tsv", TaskMode::kBinary, {}, Language::kEn);
  ASSERT_EQ(dev.size(), 10u);
  EXPECT_EQ(std::count_if(dev.examples.begin(), dev.examples.end(),
                          [](const Example& e) { return e.label == 1; }),
            6);
  ASSERT_EQ(run("augment").code, 0);
  EXPECT_EQ(data_rows(run.dir / "nlpaug.tsv"), 16u);
}

TEST(Cli, ToyChainAndAnalyzeAcrossRuns) {
  const auto start = std::chrono::steady_clock::now();
  TempDir tmp;
  const fs::path uu = tmp / "uu", single = tmp / "single";
  CliRun run(binary_config());
  for (const auto& [dir, strategy] : {std::pair{uu, "uu_tax"}, std::pair{single, "single_stage_1"}}) {
    for (const char* command : {"prepare", "augment", "train", "predict", "evaluate"}) {
      CliResult r = run_cli({command, "--config", run.config.string(), "--run-dir", dir.string(),
                             "--strategy", strategy});
      ASSERT_EQ(r.code, 0) << command << ": " << r.err;
    }
    EXPECT_TRUE(fs::exists(dir / "metrics_en.tsv"));
    nlohmann::json manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
    for (const char* command : {"prepare", "augment", "train", "predict", "evaluate"}) {
      EXPECT_TRUE(manifest["commands"].contains(command)) << command;
    }
    // Wall-clock times live outside the manifest.
    EXPECT_TRUE(fs::exists(dir / "timestamps.json"));
    EXPECT_EQ(manifest.dump().find("Z\""), std::string::npos);
  }
  nlohmann::json plan = nlohmann::json::parse(read_text(uu / "plan.json"));
  EXPECT_EQ(plan["stages"].size(), 2u);

  CliRun analyze(binary_config("analyze.runs = uu_tax:" + uu.string() + ", single:" + single.string() + "\n"));
  CliResult r = run_cli({"analyze", "--config", analyze.config.string(), "--run-dir", (tmp / "cmp").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string plot = read_text(tmp / "cmp" / "pattern_errors_plot.tsv");
  EXPECT_EQ(plot.rfind("pattern\tmodel\tpct\tseen\n", 0), 0u);
  EXPECT_NE(plot.find("\tuu_tax\t"), std::string::npos);
  EXPECT_NE(plot.find("\tsingle\t"), std::string::npos);
  EXPECT_EQ(data_rows(tmp / "cmp" / "comparison.tsv"), 2u);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(60));
}

TEST(Cli, LikertChain) {
  CliRun run("task = likert\nlanguage = en\nseed = 13\n"
          "train_file = " + toy("likert_en.tsv").string() + "\n"
          "encoder = hashed:64\nregressor = svr\n");
  for (const char* command : {"prepare", "train", "predict", "evaluate"}) {
    CliResult r = run(command);
    ASSERT_EQ(r.code, 0) << command << ": " << r.err;
  }
  std::string metrics = read_text(run.dir / "metrics_en.tsv");
  EXPECT_EQ(metrics.rfind("language\trho\n", 0), 0u);
  EXPECT_EQ(run("augment").code, cli::kExitConfig);
}

}  // namespace
}  // namespace taxo

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

#include "taxo/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "taxo/backends.hpp"
#include "test_support.hpp"

namespace taxo {
namespace {

using testing::make_corpus;
using testing::make_example;

const std::set<std::string> kAllHandles = {"nlpaug", "translated", "original", "commonsense"};

using Stages = std::vector<std::set<std::string>>;

// Stage-by-stage dataset sets from the published ablation matrix.
const std::map<std::string, Stages> kMatrix = {
    {"uu_tax", {{"nlpaug"}, {"translated", "original"}}},
    {"ablation1", {{"nlpaug"}, {"original"}}},
    {"ablation2", {{"translated"}, {"original"}}},
    {"single_stage_1", {{"original"}}},
    {"single_stage_2", {{"nlpaug", "translated", "original"}}},
    {"multi_task", {{"commonsense"}, {"nlpaug", "original"}}},
};

TEST(BuildTrainingPlan, MatchesMatrixAndDefaults) {
  for (const auto& [strategy, stages] : kMatrix) {
    TrainingPlan plan = build_training_plan(strategy, Language::kEn, kAllHandles);
    ASSERT_EQ(plan.stages.size(), stages.size()) << strategy;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const StageConfig& st = plan.stages[s];
      EXPECT_EQ(std::set<std::string>(st.datasets.begin(), st.datasets.end()), stages[s]) << strategy;
      const bool last = s + 1 == stages.size();
      EXPECT_DOUBLE_EQ(st.learning_rate, last ? 4e-5 : 3e-5) << strategy;
      EXPECT_EQ(st.epochs, 4);
      EXPECT_EQ(st.batch_size, 8);
      EXPECT_EQ(st.optimizer, "adamw");
    }
  }
  EXPECT_EQ(kStrategies.size(), kMatrix.size());
}

TEST(BuildTrainingPlan, UnknownStrategyListsValidOnes) {
  try {
    build_training_plan("three_stage", Language::kEn, kAllHandles);
    FAIL();
  } catch (const ConfigError& e) {
    std::string what = e.what();
    for (auto s : kStrategies) EXPECT_NE(what.find(std::string(s)), std::string::npos) << s;
  }
}

TEST(BuildTrainingPlan, MissingHandleIsNamed) {
  try {
    build_training_plan("uu_tax", Language::kEn, {"nlpaug", "original"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'translated'"), std::string::npos);
  }
  EXPECT_NO_THROW(build_training_plan("single_stage_1", Language::kFr, {"original"}));
}

TEST(BuildTrainingPlan, Overrides) {
  HyperParameterOverrides hp;
  hp.epochs = 2;
  hp.batch_size = 16;
  hp.stage1_learning_rate = 1e-5;
  hp.stage2_learning_rate = 2e-5;
  hp.lr_schedule = "constant";
  hp.stage1_includes_original = true;
  TrainingPlan plan = build_training_plan("uu_tax", Language::kIt, kAllHandles, hp);
  EXPECT_EQ(plan.stages[0].datasets, (std::vector<std::string>{"nlpaug", "original"}));
  EXPECT_DOUBLE_EQ(plan.stages[0].learning_rate, 1e-5);
  EXPECT_DOUBLE_EQ(plan.stages[1].learning_rate, 2e-5);
  EXPECT_EQ(plan.stages[1].epochs, 2);
  EXPECT_EQ(plan.stages[1].batch_size, 16);
  EXPECT_EQ(plan.stages[1].lr_schedule, "constant");
  hp.epochs = 0;
  EXPECT_THROW(build_training_plan("uu_tax", Language::kIt, kAllHandles, hp), ConfigError);
}

TEST(TrainingPlan, JsonRoundTrip) {
  TrainingPlan plan = build_training_plan("multi_task", Language::kFr, kAllHandles);
  TrainingPlan back = plan_from_json(nlohmann::json::parse(to_json(plan).dump()));
  EXPECT_EQ(to_json(back), to_json(plan));
  EXPECT_EQ(back.language, Language::kFr);
}

// Records each fine_tune call.
class RecordingBackend : public ClassifierBackend {
 public:
  struct Call {
    std::vector<std::string> ids;
    double learning_rate;
    std::uint64_t seed;
  };

  std::string name() const override { return "recording"; }
  void fine_tune(const std::vector<Example>& data, const StageConfig& stage,
                 std::uint64_t seed) override {
    if (fail_on_call == static_cast<int>(calls.size())) throw ProviderError("device lost");
    Call call{{}, stage.learning_rate, seed};
    for (const Example& e : data) call.ids.push_back(e.id);
    calls.push_back(std::move(call));
  }
  std::vector<int> predict(const std::vector<std::string>& texts) const override {
    return std::vector<int>(texts.size() + extra_outputs, label);
  }
  std::string fingerprint() const override { return hex64(calls.size()); }
  bool trained() const override { return !calls.empty(); }
  void save(std::ostream&) const override {}
  void load(std::istream&) override {}

  std::vector<Call> calls;
  int fail_on_call = -1;
  int label = 1;
  std::size_t extra_outputs = 0;
};

std::map<std::string, Corpus> handles() {
  std::map<std::string, Corpus> data;
  for (std::string name : {"nlpaug", "translated", "original", "commonsense"}) {
    Corpus c;
    for (int i = 0; i < 3; ++i) {
      c.examples.push_back(make_example(name + std::to_string(i), name + " text " + std::to_string(i), i % 2));
    }
    data[name] = c;
  }
  return data;
}

std::set<std::string> prefixes(const std::vector<std::string>& ids) {
  std::set<std::string> out;
  for (const std::string& id : ids) out.insert(id.substr(0, id.size() - 1));
  return out;
}

TEST(ExecutePlan, RecordsStagesInOrder) {
  TrainingPlan plan = build_training_plan("uu_tax", Language::kEn, kAllHandles);
  RecordingBackend backend;
  ExecutionTrace trace = execute_plan(plan, handles(), backend, 7);
  ASSERT_EQ(backend.calls.size(), 2u);
  EXPECT_EQ(prefixes(backend.calls[0].ids), (std::set<std::string>{"nlpaug"}));
  EXPECT_DOUBLE_EQ(backend.calls[0].learning_rate, 3e-5);
  EXPECT_EQ(prefixes(backend.calls[1].ids), (std::set<std::string>{"translated", "original"}));
  EXPECT_EQ(backend.calls[1].ids.size(), 6u);
  EXPECT_DOUBLE_EQ(backend.calls[1].learning_rate, 4e-5);
  ASSERT_EQ(trace.stages.size(), 2u);
  EXPECT_TRUE(trace.ok());
  EXPECT_EQ(trace.stages[1].datasets[0].name, "translated");
  EXPECT_EQ(trace.stages[1].datasets[1].name, "original");
  EXPECT_EQ(trace.stages[1].examples, 6u);
}

TEST(ExecutePlan, SingleStageTraceAndShuffleDeterminism) {
  TrainingPlan plan = build_training_plan("single_stage_2", Language::kEn, kAllHandles);
  RecordingBackend a, b;
  ExecutionTrace ta = execute_plan(plan, handles(), a, 3);
  execute_plan(plan, handles(), b, 3);
  EXPECT_EQ(ta.stages.size(), 1u);
  EXPECT_EQ(a.calls[0].ids, b.calls[0].ids);
  EXPECT_EQ(a.calls[0].seed, b.calls[0].seed);
}

TEST(ExecutePlan, FailureMarksStageAndStops) {
  TrainingPlan plan = build_training_plan("ablation1", Language::kEn, kAllHandles);
  RecordingBackend backend;
  backend.fail_on_call = 1;
  try {
    execute_plan(plan, handles(), backend, 1);
    FAIL();
  } catch (const StageFailure& f) {
    EXPECT_EQ(f.category(), ErrorCategory::kProvider);
    ASSERT_EQ(f.trace().stages.size(), 2u);
    EXPECT_TRUE(f.trace().stages[0].ok);
    EXPECT_FALSE(f.trace().stages[1].ok);
    EXPECT_FALSE(f.trace().ok());
    EXPECT_NE(f.trace().stages[1].error.find("device lost"), std::string::npos);
    std::string jsonl = trace_to_jsonl(f.trace());
    EXPECT_NE(jsonl.find("\"status\":\"failed\""), std::string::npos);
  }
}

TEST(ExecutePlan, MissingDatasetIsPrecondition) {
  TrainingPlan plan = build_training_plan("uu_tax", Language::kEn, kAllHandles);
  auto data = handles();
  data.erase("translated");
  RecordingBackend backend;
  EXPECT_THROW(execute_plan(plan, data, backend, 1), PreconditionError);
}

TEST(TraceToJsonl, OneLinePerStagePlusHeader) {
  TrainingPlan plan = build_training_plan("uu_tax", Language::kFr, kAllHandles);
  RecordingBackend backend;
  std::string jsonl = trace_to_jsonl(execute_plan(plan, handles(), backend, 5));
  std::istringstream in(jsonl);
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0]["event"], "plan");
  EXPECT_EQ(lines[0]["seed"], 5);
  EXPECT_EQ(lines[0]["language"], "fr");
  for (int s = 1; s <= 2; ++s) {
    EXPECT_EQ(lines[s]["event"], "stage");
    EXPECT_EQ(lines[s]["status"], "ok");
    EXPECT_TRUE(lines[s].contains("fingerprint_after"));
    EXPECT_EQ(lines[s]["epochs"], 4);
  }
}

// --- reference backend ---------------------------------------------------

Corpus separable_corpus() {
  Corpus c;
  for (int i = 0; i < 40; ++i) {
    bool pos = i % 2 == 0;
    std::string text = pos ? "I like item" + std::to_string(i) + ", a special kind of thing"
                           : "I like item" + std::to_string(i) + " more than anything";
    c.examples.push_back(make_example(std::to_string(i), text, pos ? 1 : 0));
  }
  return c;
}

StageConfig stage(double lr = 4e-5, int epochs = 4) {
  StageConfig s;
  s.datasets = {"original"};
  s.learning_rate = lr;
  s.epochs = epochs;
  return s;
}

TEST(HashedLinearBackend, SameSeedSameFingerprint) {
  Corpus c = separable_corpus();
  HashedLinearBackend a, b, other;
  a.fine_tune(c.examples, stage(), 11);
  b.fine_tune(c.examples, stage(), 11);
  other.fine_tune(c.examples, stage(), 12);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), other.fingerprint());
}

TEST(HashedLinearBackend, ZeroEpochStageLeavesStateUnchanged) {
  Corpus c = separable_corpus();
  HashedLinearBackend backend;
  backend.fine_tune(c.examples, stage(), 1);
  const std::string before = backend.fingerprint();
  backend.fine_tune(c.examples, stage(4e-5, 0), 2);
  EXPECT_EQ(backend.fingerprint(), before);
}

TEST(HashedLinearBackend, LearningRateChangesOutcome) {
  Corpus c = separable_corpus();
  HashedLinearBackend slow, fast;
  slow.fine_tune(c.examples, stage(3e-5), 1);
  fast.fine_tune(c.examples, stage(4e-5), 1);
  EXPECT_NE(slow.fingerprint(), fast.fingerprint());
}

TEST(HashedLinearBackend, SeparableTrainingSetIsFit) {
  Corpus c = separable_corpus();
  HashedLinearBackend backend;
  backend.fine_tune(c.examples, stage(), 1);
  std::vector<int> pred = predict_labels(backend, c);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(pred[i], *c.examples[i].label) << i;
}

TEST(HashedLinearBackend, PredictionsFollowInputPermutation) {
  Corpus c = separable_corpus();
  HashedLinearBackend backend;
  backend.fine_tune(c.examples, stage(), 1);
  std::vector<int> pred = predict_labels(backend, c);
  Corpus shuffled = c;
  Rng rng(5);
  seeded_shuffle(shuffled.examples, rng);
  std::vector<int> again = predict_labels(backend, shuffled);
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    EXPECT_EQ(again[i], pred[std::stoul(shuffled.examples[i].id)]);
  }
}

TEST(HashedLinearBackend, SaveLoadRoundTrip) {
  Corpus c = separable_corpus();
  HashedLinearBackend backend;
  backend.fine_tune(c.examples, stage(), 1);
  std::stringstream buf;
  backend.save(buf);
  HashedLinearBackend loaded;
  loaded.load(buf);
  EXPECT_EQ(loaded.fingerprint(), backend.fingerprint());
  EXPECT_TRUE(loaded.trained());
  std::istringstream junk("nonsense");
  EXPECT_THROW(loaded.load(junk), ValueError);
}

TEST(HashedLinearBackend, Errors) {
  HashedLinearBackend backend;
  EXPECT_THROW(predict_labels(backend, separable_corpus()), StateError);
  StageConfig sgd = stage();
  sgd.optimizer = "sgd";
  EXPECT_THROW(backend.fine_tune(separable_corpus().examples, sgd, 1), ConfigError);
  std::vector<Example> unlabeled = {make_example("1", "x")};
  EXPECT_THROW(backend.fine_tune(unlabeled, stage(), 1), PreconditionError);
}

TEST(PredictLabels, ShapeAndRangeChecks) {
  RecordingBackend backend;
  backend.calls.push_back({});
  backend.extra_outputs = 1;
  EXPECT_THROW(predict_labels(backend, make_corpus({{"a b", 1}})), ShapeError);
  backend.extra_outputs = 0;
  backend.label = 2;
  EXPECT_THROW(predict_labels(backend, make_corpus({{"a b", 1}})), ValueError);
}

TEST(TfidfSvmBackend, AccumulatesStagesAndRoundTrips) {
  Corpus c = separable_corpus();
  auto backend = make_backend("tfidf_svm");
  std::vector<Example> first(c.examples.begin(), c.examples.begin() + 20);
  std::vector<Example> second(c.examples.begin() + 20, c.examples.end());
  backend->fine_tune(first, stage(), 1);
  const std::string after_first = backend->fingerprint();
  backend->fine_tune(second, stage(), 2);
  EXPECT_NE(backend->fingerprint(), after_first);
  std::vector<int> pred = predict_labels(*backend, c);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(pred[i], *c.examples[i].label);
  std::stringstream buf;
  backend->save(buf);
  auto loaded = make_backend("tfidf_svm");
  loaded->load(buf);
  EXPECT_EQ(predict_labels(*loaded, c), pred);
}

TEST(ExternalCommandBackend, DrivesCommandProtocol) {
  testing::TempDir dir;
  const auto script = dir / "fake.sh";
  testing::write_text(script,
                      "#!/bin/sh\n"
                      "cmd=$1; shift\n"
                      "while [ $# -gt 0 ]; do\n"
                      "  case $1 in\n"
                      "    --state) state=$2 ;; --input) input=$2 ;; --output) output=$2 ;;\n"
                      "    --lr) lr=$2 ;;\n"
                      "  esac; shift 2\n"
                      "done\n"
                      "if [ \"$cmd\" = train ]; then echo \"lr=$lr\" >> \"$state/log\"; exit 0; fi\n"
                      "sed 's/.*/1/' \"$input\" > \"$output\"\n");
  std::filesystem::permissions(script, std::filesystem::perms::owner_all);
  auto backend = make_backend("external", {{"command", script.string()},
                                           {"state_dir", (dir / "state").string()}});
  EXPECT_FALSE(backend->trained());
  backend->fine_tune(separable_corpus().examples, stage(3e-5), 1);
  EXPECT_TRUE(backend->trained());
  EXPECT_EQ(testing::read_text(dir / "state" / "log"), "lr=3.0000000000000001e-05\n");
  EXPECT_EQ(predict_labels(*backend, make_corpus({{"a", 0}, {"b", 1}})), (std::vector<int>{1, 1}));
  auto failing = make_backend("external", {{"command", "false"}, {"state_dir", (dir / "s2").string()}});
  EXPECT_THROW(failing->fine_tune(separable_corpus().examples, stage(), 1), ProviderError);
}

TEST(BackendRegistry, BuiltinsAndUnknownName) {
  register_builtin_backends();
  std::vector<std::string> names = BackendRegistry::instance().names();
  for (const char* n : {"hashed_linear", "tfidf_svm", "external"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  try {
    make_backend("no_such_backend");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hashed_linear"), std::string::npos);
  }
}

// --- variant inputs ------------------------------------------------------

TEST(EnrichedPrompt, AppendsNounsWithSeparators) {
  Example e = make_example("1", "I like beer, and drinks too", 1);
  NounPair nouns{"beer", "drinks", {7, 11}, {17, 23}};
  EXPECT_EQ(build_enriched_prompt(e, nouns, "<SEP>").text,
            "I like beer, and drinks too <SEP> beer <SEP> drinks");
  EXPECT_EQ(build_enriched_prompt(e, nouns).text,
            "I like beer, and drinks too [SEP] beer [SEP] drinks");
}

TEST(EnrichedPrompt, RejectsReversedOrEmptyNouns) {
  Example e = make_example("1", "I like beer, and drinks too", 1);
  NounPair reversed{"drinks", "beer", {17, 23}, {7, 11}};
  EXPECT_THROW(build_enriched_prompt(e, reversed), InvariantError);
  NounPair empty{"", "drinks", {7, 7}, {17, 23}};
  EXPECT_THROW(build_enriched_prompt(e, empty), InvariantError);
}

TEST(Commonsense, RelabelsByValidity) {
  Corpus c = relabel_commonsense({{"He put milk in the fridge.", true}, {"He put a car in the fridge.", false}});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.examples[0].label, 1);
  EXPECT_EQ(c.examples[1].label, 0);
  EXPECT_EQ(c.examples[0].id, "cs-1");
}

TEST(Commonsense, MissingValidityAndEmptyDataset) {
  EXPECT_THROW(relabel_commonsense({{"x y", std::nullopt}}), SchemaError);
  testing::WarningCapture warnings;
  EXPECT_TRUE(relabel_commonsense({}).empty());
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(Commonsense, ParseFile) {
  std::istringstream in("valid\tsentence\ntrue\tA cat sleeps.\n0\tA stone sleeps.\n\tNo value.\n");
  auto records = parse_commonsense_file(in);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].valid, true);
  EXPECT_EQ(records[1].valid, false);
  EXPECT_FALSE(records[2].valid.has_value());
  std::istringstream bad("sentence\nx\n");
  EXPECT_THROW(parse_commonsense_file(bad), SchemaError);
}

}  // namespace
}  // namespace taxo

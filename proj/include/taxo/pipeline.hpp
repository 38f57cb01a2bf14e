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

// Staged fine-tuning: every training strategy is a declarative plan of
// stages, each binding named datasets to hyper-parameters, executed in order
// against a pluggable sequence classifier.

#ifndef TAXO_PIPELINE_HPP_
#define TAXO_PIPELINE_HPP_

#include <algorithm>
#include <array>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

// Dataset handle names.
inline constexpr std::string_view kNlpaugData = "nlpaug";
inline constexpr std::string_view kTranslatedData = "translated";
inline constexpr std::string_view kOriginalData = "original";
inline constexpr std::string_view kCommonsenseData = "commonsense";

// Default fine-tuning hyper-parameters.
inline constexpr int kDefaultEpochs = 4;
inline constexpr int kDefaultBatchSize = 8;
inline constexpr double kStage1LearningRate = 3e-5;
inline constexpr double kStage2LearningRate = 4e-5;
inline constexpr std::string_view kDefaultOptimizer = "adamw";
inline constexpr std::string_view kDefaultSchedule = "linear";

struct StageConfig {
  std::vector<std::string> datasets;
  double learning_rate = kStage2LearningRate;
  int epochs = kDefaultEpochs;
  int batch_size = kDefaultBatchSize;
  std::string optimizer{kDefaultOptimizer};
  std::string lr_schedule{kDefaultSchedule};
};

inline void validate_stage(const StageConfig& stage) {
  if (stage.datasets.empty()) throw ConfigError("stage lists no datasets");
  if (!(stage.learning_rate > 0.0)) throw ConfigError("stage learning rate must be positive");
  if (stage.epochs < 1) throw ConfigError("stage epochs must be at least 1");
  if (stage.batch_size < 1) throw ConfigError("stage batch size must be at least 1");
}

struct TrainingPlan {
  std::string strategy;
  Language language = Language::kEn;
  std::vector<StageConfig> stages;
};

inline constexpr std::array<std::string_view, 6> kStrategies = {
    "uu_tax", "ablation1", "ablation2", "single_stage_1", "single_stage_2", "multi_task"};

struct HyperParameterOverrides {
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> stage1_learning_rate;
  std::optional<double> stage2_learning_rate;
  std::optional<std::string> optimizer;
  std::optional<std::string> lr_schedule;
  // Adds the original data to the first stage of two-stage strategies.
  bool stage1_includes_original = false;
};

// Strategy -> stages:
//   uu_tax          {nlpaug}@lr1, {translated, original}@lr2
//   ablation1       {nlpaug}@lr1, {original}@lr2
//   ablation2       {translated}@lr1, {original}@lr2
//   single_stage_1  {original}@lr2
//   single_stage_2  {nlpaug, translated, original}@lr2
//   multi_task      {commonsense}@lr1, {nlpaug, original}@lr2
inline TrainingPlan build_training_plan(const std::string& strategy, Language language,
                                        const std::set<std::string>& available,
                                        const HyperParameterOverrides& hp = {}) {
  using Sets = std::vector<std::vector<std::string>>;
  const std::string nlpaug(kNlpaugData);
  const std::string translated(kTranslatedData);
  const std::string original(kOriginalData);
  const std::string commonsense(kCommonsenseData);
  Sets sets;
  if (strategy == "uu_tax") {
    sets = {{nlpaug}, {translated, original}};
  } else if (strategy == "ablation1") {
    sets = {{nlpaug}, {original}};
  } else if (strategy == "ablation2") {
    sets = {{translated}, {original}};
  } else if (strategy == "single_stage_1") {
    sets = {{original}};
  } else if (strategy == "single_stage_2") {
    sets = {{nlpaug, translated, original}};
  } else if (strategy == "multi_task") {
    sets = {{commonsense}, {nlpaug, original}};
  } else {
    std::vector<std::string> names(kStrategies.begin(), kStrategies.end());
    throw ConfigError("unknown strategy '" + strategy + "' (valid: " + join(names, ", ") + ")");
  }
  if (hp.stage1_includes_original && sets.size() == 2 &&
      std::find(sets[0].begin(), sets[0].end(), original) == sets[0].end()) {
    sets[0].push_back(original);
  }

  TrainingPlan plan;
  plan.strategy = strategy;
  plan.language = language;
  const double lr1 = hp.stage1_learning_rate.value_or(kStage1LearningRate);
  const double lr2 = hp.stage2_learning_rate.value_or(kStage2LearningRate);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    StageConfig stage;
    stage.datasets = sets[s];
    // The last stage always trains at the stage-2 rate.
    stage.learning_rate = s + 1 == sets.size() ? lr2 : lr1;
    stage.epochs = hp.epochs.value_or(kDefaultEpochs);
    stage.batch_size = hp.batch_size.value_or(kDefaultBatchSize);
    if (hp.optimizer) stage.optimizer = *hp.optimizer;
    if (hp.lr_schedule) stage.lr_schedule = *hp.lr_schedule;
    for (const std::string& handle : stage.datasets) {
      if (!available.count(handle)) {
        throw ConfigError("strategy '" + strategy + "' needs dataset '" + handle + "'");
      }
    }
    validate_stage(stage);
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

inline nlohmann::json to_json(const StageConfig& s) {
  return {{"datasets", s.datasets},     {"learning_rate", s.learning_rate},
          {"epochs", s.epochs},         {"batch_size", s.batch_size},
          {"optimizer", s.optimizer},   {"lr_schedule", s.lr_schedule}};
}

inline nlohmann::json to_json(const TrainingPlan& plan) {
  nlohmann::json stages = nlohmann::json::array();
  for (const StageConfig& s : plan.stages) stages.push_back(to_json(s));
  return {{"strategy", plan.strategy}, {"language", to_string(plan.language)}, {"stages", stages}};
}

inline TrainingPlan plan_from_json(const nlohmann::json& j) {
  TrainingPlan plan;
  plan.strategy = j.at("strategy").get<std::string>();
  plan.language = parse_language(j.at("language").get<std::string>());
  for (const auto& s : j.at("stages")) {
    StageConfig stage;
    stage.datasets = s.at("datasets").get<std::vector<std::string>>();
    stage.learning_rate = s.at("learning_rate").get<double>();
    stage.epochs = s.at("epochs").get<int>();
    stage.batch_size = s.at("batch_size").get<int>();
    stage.optimizer = s.at("optimizer").get<std::string>();
    stage.lr_schedule = s.at("lr_schedule").get<std::string>();
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Backends.

// Stable digest of a corpus' ids, texts and labels/scores.
inline std::string fingerprint_corpus(const Corpus& corpus) {
  std::uint64_t h = fnv1a64(to_string(corpus.language));
  for (const Example& e : corpus.examples) {
    h = fnv1a64(e.id, h);
    h = fnv1a64("\t", h);
    h = fnv1a64(e.text, h);
    h = fnv1a64("\t", h);
    h = fnv1a64(e.label ? std::to_string(*e.label) : format_exact(e.score.value_or(0.0)), h);
    h = fnv1a64("\n", h);
  }
  return hex64(h);
}

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual std::string name() const = 0;
  // Continues training from the current state.
  virtual void fine_tune(const std::vector<Example>& data, const StageConfig& stage,
                         std::uint64_t seed) = 0;
  // Pure given the current state; throws StateError before any training.
  virtual std::vector<int> predict(const std::vector<std::string>& texts) const = 0;
  virtual std::string fingerprint() const = 0;
  virtual bool trained() const = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

using BackendOptions = std::map<std::string, std::string>;
using BackendFactory = std::function<std::unique_ptr<ClassifierBackend>(const BackendOptions&)>;

// Backends discovered by name.
class BackendRegistry {
 public:
  static BackendRegistry& instance() {
    static BackendRegistry registry;
    return registry;
  }

  void add(const std::string& name, BackendFactory factory) {
    std::lock_guard<std::mutex> lock(mu_);
    factories_[name] = std::move(factory);
  }

  std::unique_ptr<ClassifierBackend> create(const std::string& name,
                                            const BackendOptions& options = {}) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = factories_.find(name);
    if (it == factories_.end()) {
      std::vector<std::string> names;
      for (const auto& entry : factories_) names.push_back(entry.first);
      throw ConfigError("unknown backend '" + name + "' (registered: " + join(names, ", ") + ")");
    }
    return it->second(options);
  }

  std::vector<std::string> names() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    for (const auto& entry : factories_) out.push_back(entry.first);
    return out;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, BackendFactory> factories_;
};

// ---------------------------------------------------------------------------
// Execution.

struct DatasetRecord {
  std::string name;
  std::string fingerprint;
  std::size_t size = 0;
};

struct StageTrace {
  std::size_t index = 0;
  std::vector<DatasetRecord> datasets;
  double learning_rate = 0.0;
  int epochs = 0;
  int batch_size = 0;
  std::string optimizer;
  std::string lr_schedule;
  std::size_t examples = 0;
  bool ok = false;
  std::string error;
  std::string fingerprint_after;
};

struct ExecutionTrace {
  std::string strategy;
  Language language = Language::kEn;
  std::uint64_t seed = 0;
  std::string backend;
  std::vector<StageTrace> stages;

  bool ok() const {
    return std::all_of(stages.begin(), stages.end(), [](const StageTrace& s) { return s.ok; });
  }
};

// Thrown when a stage fails; carries the trace up to and including the
// failed stage. The category follows the backend's error.
class StageFailure : public Error {
 public:
  StageFailure(ErrorCategory category, const std::string& what, ExecutionTrace trace)
      : Error(category, what), trace_(std::move(trace)) {}
  const ExecutionTrace& trace() const { return trace_; }

 private:
  ExecutionTrace trace_;
};

// Runs the stages in order. Each stage concatenates its datasets in listed
// order and shuffles the result with a seed derived from (seed, stage).
inline ExecutionTrace execute_plan(const TrainingPlan& plan,
                                   const std::map<std::string, Corpus>& datasets,
                                   ClassifierBackend& backend, std::uint64_t seed) {
  ExecutionTrace trace;
  trace.strategy = plan.strategy;
  trace.language = plan.language;
  trace.seed = seed;
  trace.backend = backend.name();
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const StageConfig& stage = plan.stages[s];
    StageTrace st;
    st.index = s;
    st.learning_rate = stage.learning_rate;
    st.epochs = stage.epochs;
    st.batch_size = stage.batch_size;
    st.optimizer = stage.optimizer;
    st.lr_schedule = stage.lr_schedule;
    std::vector<Example> data;
    for (const std::string& handle : stage.datasets) {
      auto it = datasets.find(handle);
      if (it == datasets.end()) {
        throw PreconditionError("dataset '" + handle + "' was not supplied");
      }
      st.datasets.push_back({handle, fingerprint_corpus(it->second), it->second.size()});
      data.insert(data.end(), it->second.examples.begin(), it->second.examples.end());
    }
    Rng rng(derive_seed(seed, {s, 0x57a6eULL}));
    seeded_shuffle(data, rng);
    st.examples = data.size();
    try {
      backend.fine_tune(data, stage, derive_seed(seed, {s, 0xf17eULL}));
    } catch (const Error& e) {
      st.error = e.what();
      trace.stages.push_back(std::move(st));
      throw StageFailure(e.category(),
                         "stage " + std::to_string(s + 1) + " failed: " + e.what(), trace);
    } catch (const std::exception& e) {
      st.error = e.what();
      trace.stages.push_back(std::move(st));
      throw StageFailure(ErrorCategory::kData,
                         "stage " + std::to_string(s + 1) + " failed: " + e.what(), trace);
    }
    st.ok = true;
    st.fingerprint_after = backend.fingerprint();
    trace.stages.push_back(std::move(st));
  }
  return trace;
}

// One JSON object per line: a header line, then one line per stage.
inline std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::string out;
  nlohmann::json header = {{"event", "plan"},
                           {"strategy", trace.strategy},
                           {"language", to_string(trace.language)},
                           {"seed", trace.seed},
                           {"backend", trace.backend}};
  out += header.dump() + "\n";
  for (const StageTrace& s : trace.stages) {
    nlohmann::json datasets = nlohmann::json::array();
    for (const DatasetRecord& d : s.datasets) {
      datasets.push_back({{"name", d.name}, {"fingerprint", d.fingerprint}, {"size", d.size}});
    }
    nlohmann::json line = {{"event", "stage"},
                           {"index", s.index},
                           {"datasets", datasets},
                           {"learning_rate", s.learning_rate},
                           {"epochs", s.epochs},
                           {"batch_size", s.batch_size},
                           {"optimizer", s.optimizer},
                           {"lr_schedule", s.lr_schedule},
                           {"examples", s.examples},
                           {"status", s.ok ? "ok" : "failed"},
                           {"fingerprint_after", s.fingerprint_after}};
    if (!s.error.empty()) line["error"] = s.error;
    out += line.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inputs for the variant strategies.

inline constexpr std::string_view kDefaultSeparator = "[SEP]";

struct EnrichedPrompt {
  std::string text;
};

// "sentence SEP noun1 SEP noun2"; framing tokens belong to the backend.
inline EnrichedPrompt build_enriched_prompt(const Example& example, const NounPair& nouns,
                                            std::string_view separator = kDefaultSeparator) {
  validate_noun_pair(example.text, nouns);
  std::string text = example.text;
  text.append(" ").append(separator).append(" ").append(nouns.noun1);
  text.append(" ").append(separator).append(" ").append(nouns.noun2);
  return {std::move(text)};
}

struct CommonsenseRecord {
  std::string sentence;
  std::optional<bool> valid;
};

// Label 1 for valid sentences, 0 otherwise.
inline Corpus relabel_commonsense(const std::vector<CommonsenseRecord>& records) {
  Corpus corpus;
  corpus.language = Language::kEn;
  if (records.empty()) warn("commonsense dataset is empty");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const CommonsenseRecord& r = records[i];
    if (!r.valid) {
      throw SchemaError("commonsense record " + std::to_string(i + 1) + " has no validity field");
    }
    Example e;
    e.id = "cs-" + std::to_string(i + 1);
    e.text = r.sentence;
    e.language = Language::kEn;
    e.label = *r.valid ? 1 : 0;
    corpus.examples.push_back(std::move(e));
  }
  return corpus;
}

// TSV with a header naming "sentence" and "valid" columns; validity is
// 1/0/true/false, an empty cell means missing.
inline std::vector<CommonsenseRecord> parse_commonsense_file(std::istream& in) {
  std::string line;
  if (!read_line(in, line)) return {};
  std::vector<std::string> header = split(line, '\t');
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (case_fold(trim(header[i])) == name) return i;
    }
    return std::nullopt;
  };
  auto sentence_col = column("sentence");
  if (!sentence_col) throw SchemaError("commonsense file has no 'sentence' column");
  auto valid_col = column("valid");
  if (!valid_col) throw SchemaError("commonsense file has no 'valid' column");
  std::vector<CommonsenseRecord> records;
  std::size_t row = 1;
  while (read_line(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split(line, '\t');
    CommonsenseRecord r;
    if (*sentence_col >= f.size()) {
      throw ValueError("commonsense row " + std::to_string(row) + " has no sentence");
    }
    r.sentence = std::string(trim(f[*sentence_col]));
    if (*valid_col < f.size()) {
      std::string v = case_fold(trim(f[*valid_col]));
      if (v == "1" || v == "true") r.valid = true;
      else if (v == "0" || v == "false") r.valid = false;
      else if (!v.empty()) {
        throw ValueError("commonsense row " + std::to_string(row) + ": bad validity '" + v + "'");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<int> predict_labels(const ClassifierBackend& backend, const Corpus& corpus) {
  if (!backend.trained()) throw StateError("backend '" + backend.name() + "' is not trained");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const Example& e : corpus.examples) texts.push_back(e.text);
  std::vector<int> labels = backend.predict(texts);
  if (labels.size() != corpus.size()) {
    throw ShapeError("backend returned " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(corpus.size()) + " examples");
  }
  for (int label : labels) {
    if (label != 0 && label != 1) throw ValueError("backend returned a label outside {0,1}");
  }
  return labels;
}

}  // namespace taxo

#endif  // TAXO_PIPELINE_HPP_

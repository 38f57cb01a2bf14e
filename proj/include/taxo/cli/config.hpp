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

// Run configuration: a flat "key = value" file. Lines starting with '#' are
// comments. Relative paths resolve against the config file's directory.
// See README.md for the key reference.

#ifndef TAXO_CLI_CONFIG_HPP_
#define TAXO_CLI_CONFIG_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taxo/backends.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"
#include "taxo/pipeline.hpp"
#include "taxo/regressors.hpp"
#include "taxo/tfidf.hpp"

namespace taxo::cli {

namespace fs = std::filesystem;

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues out;
  std::string line;
  std::size_t row = 0;
  while (read_line(in, line)) {
    ++row;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(row) + ": expected key = value");
    }
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(row) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(row) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

struct NamedRun {
  std::string name;
  fs::path dir;
};

struct RunConfig {
  // Snapshot of the effective settings, recorded in the manifest.
  KeyValues values;
  fs::path base_dir;

  TaskMode task = TaskMode::kBinary;
  Language language = Language::kEn;
  std::string strategy = "uu_tax";
  std::uint64_t seed = 0;
  fs::path run_dir;

  fs::path train_file;
  std::optional<fs::path> test_file;
  ColumnMap columns;
  std::optional<fs::path> complex_patterns;
  double dev_fraction = kDefaultDevFraction;
  double noun_threshold = kDefaultNounThreshold;

  // Augmentation.
  std::string fill_model = "lexicon";
  std::optional<fs::path> fill_lexicon;
  std::vector<std::string> fill_words;
  int max_edits = 2;
  int inserts_per_example = 1;
  int substitutes_per_positive = 1;
  std::string translator = "identity";
  std::optional<fs::path> dictionary;
  std::string translator_endpoint;
  std::string translator_key_env = "TAXO_TRANSLATE_API_KEY";
  std::map<Language, fs::path> peer_files;
  std::size_t max_in_flight = 1;
  int retry_attempts = 3;
  int retry_backoff_ms = 200;

  // Training.
  std::string backend = "hashed_linear";
  BackendOptions backend_options;
  HyperParameterOverrides hp;
  std::optional<fs::path> commonsense_file;
  bool enriched = false;
  std::string separator{kDefaultSeparator};

  // Regression task.
  std::string encoder = "hashed";
  RegressorKind regressor = RegressorKind::kSvr;
  RegressorParams regressor_params;
  bool clamp = false;

  // Reporting.
  std::map<Language, fs::path> peer_runs;
  std::vector<NamedRun> analyze_runs;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "task", "language", "strategy", "seed", "run_dir", "train_file", "test_file",
      "column.id", "column.text", "column.value", "complex_patterns", "dev_fraction",
      "noun_threshold", "fill_model", "fill.lexicon", "fill.words", "max_edits",
      "inserts_per_example", "substitutes_per_positive", "translator", "translator.dictionary",
      "translator.endpoint", "translator.key_env", "translator.max_in_flight",
      "translator.retries", "translator.backoff_ms", "peer_file.en", "peer_file.fr",
      "peer_file.it", "backend", "hp.epochs", "hp.batch_size", "hp.stage1_lr", "hp.stage2_lr",
      "hp.optimizer", "hp.schedule", "hp.stage1_with_original", "commonsense_file", "enriched",
      "separator", "encoder", "regressor", "knn.k", "svr.epsilon", "svr.C", "svr.gamma",
      "clamp", "peer_run.en", "peer_run.fr", "peer_run.it", "analyze.runs"};
  return keys;
}

inline long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long out = std::stoll(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' must be an integer, got '" + v + "'");
}

inline double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' must be a number, got '" + v + "'");
}

inline bool to_bool(const std::string& key, const std::string& v) {
  std::string f = case_fold(v);
  if (f == "true" || f == "1" || f == "yes") return true;
  if (f == "false" || f == "0" || f == "no") return false;
  throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
}

inline std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (const std::string& part : split(v, ',')) {
    std::string_view t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace detail

// Overrides from the command line; they win over the file.
struct CommandLineOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> run_dir;
  std::optional<std::string> language;
  std::optional<std::string> strategy;
};

// Parses and validates everything, including that referenced input files
// exist. No side effects.
inline RunConfig load_run_config(const fs::path& config_path,
                                 const CommandLineOverrides& overrides = {}) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + config_path.string());
  KeyValues kv = parse_key_values(in, config_path.string());
  if (overrides.seed) kv["seed"] = std::to_string(*overrides.seed);
  if (overrides.language) kv["language"] = *overrides.language;
  if (overrides.strategy) kv["strategy"] = *overrides.strategy;

  for (const auto& [key, value] : kv) {
    if (key.rfind("backend.", 0) == 0) continue;
    if (!detail::known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig c;
  c.base_dir = fs::absolute(config_path).parent_path();
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  auto path_of = [&](const std::string& value) {
    fs::path p(value);
    return p.is_absolute() ? p : (c.base_dir / p).lexically_normal();
  };
  auto existing = [&](const std::string& key) -> std::optional<fs::path> {
    auto v = get(key);
    if (!v) return std::nullopt;
    fs::path p = path_of(*v);
    if (!fs::exists(p)) throw ConfigError("'" + key + "' points to a missing file: " + p.string());
    return p;
  };
  auto language_of = [](const std::string& key, const std::string& v) {
    try {
      return parse_language(v);
    } catch (const Error& e) {
      throw ConfigError("'" + key + "': " + e.what());
    }
  };

  if (auto v = get("task")) c.task = parse_task_mode(*v);
  auto seed = get("seed");
  if (!seed) throw ConfigError("config must set 'seed'");
  long long s = detail::to_integer("seed", *seed);
  if (s < 0) throw ConfigError("'seed' must be non-negative");
  c.seed = static_cast<std::uint64_t>(s);

  auto train = existing("train_file");
  if (!train) throw ConfigError("config must set 'train_file'");
  c.train_file = *train;
  if (auto v = get("language")) {
    c.language = language_of("language", *v);
  } else if (auto inferred = language_from_path(c.train_file)) {
    c.language = *inferred;
  } else {
    throw ConfigError("set 'language': it cannot be inferred from " + c.train_file.string());
  }
  c.test_file = existing("test_file");

  if (overrides.run_dir) {
    c.run_dir = fs::absolute(*overrides.run_dir).lexically_normal();
  } else if (auto v = get("run_dir")) {
    c.run_dir = path_of(*v);
  } else {
    throw ConfigError("config must set 'run_dir' (or pass --run-dir)");
  }

  if (auto v = get("column.id")) c.columns.id = *v;
  if (auto v = get("column.text")) c.columns.text = *v;
  if (auto v = get("column.value")) c.columns.value = *v;
  c.complex_patterns = existing("complex_patterns");
  if (auto v = get("dev_fraction")) c.dev_fraction = detail::to_real("dev_fraction", *v);
  if (!(c.dev_fraction > 0.0 && c.dev_fraction < 1.0)) {
    throw ConfigError("'dev_fraction' must lie strictly between 0 and 1");
  }
  if (auto v = get("noun_threshold")) c.noun_threshold = detail::to_real("noun_threshold", *v);
  if (!(c.noun_threshold > 0.0 && c.noun_threshold <= 1.0)) {
    throw ConfigError("'noun_threshold' must lie in (0, 1]");
  }

  if (auto v = get("fill_model")) c.fill_model = *v;
  if (c.fill_model != "lexicon" && c.fill_model != "fixed") {
    throw ConfigError("unknown fill_model '" + c.fill_model + "' (valid: lexicon, fixed)");
  }
  c.fill_lexicon = existing("fill.lexicon");
  if (auto v = get("fill.words")) c.fill_words = detail::to_list(*v);
  if (c.task == TaskMode::kBinary && c.fill_model == "lexicon" && !c.fill_lexicon) {
    throw ConfigError("fill_model = lexicon needs 'fill.lexicon'");
  }
  if (c.task == TaskMode::kBinary && c.fill_model == "fixed" && c.fill_words.empty()) {
    throw ConfigError("fill_model = fixed needs 'fill.words'");
  }
  if (auto v = get("max_edits")) c.max_edits = static_cast<int>(detail::to_integer("max_edits", *v));
  if (c.max_edits < 1) throw ConfigError("'max_edits' must be at least 1");
  if (auto v = get("inserts_per_example")) {
    c.inserts_per_example = static_cast<int>(detail::to_integer("inserts_per_example", *v));
  }
  if (auto v = get("substitutes_per_positive")) {
    c.substitutes_per_positive =
        static_cast<int>(detail::to_integer("substitutes_per_positive", *v));
  }
  if (c.inserts_per_example < 0 || c.substitutes_per_positive < 0) {
    throw ConfigError("augmentation variant counts must be non-negative");
  }

  if (auto v = get("translator")) c.translator = *v;
  if (c.translator != "identity" && c.translator != "dictionary" && c.translator != "http") {
    throw ConfigError("unknown translator '" + c.translator +
                      "' (valid: identity, dictionary, http)");
  }
  c.dictionary = existing("translator.dictionary");
  if (c.translator == "dictionary" && !c.dictionary) {
    throw ConfigError("translator = dictionary needs 'translator.dictionary'");
  }
  c.translator_endpoint = get("translator.endpoint").value_or("");
  if (auto v = get("translator.key_env")) c.translator_key_env = *v;
  if (auto v = get("translator.max_in_flight")) {
    long long n = detail::to_integer("translator.max_in_flight", *v);
    if (n < 1) throw ConfigError("'translator.max_in_flight' must be at least 1");
    c.max_in_flight = static_cast<std::size_t>(n);
  }
  if (auto v = get("translator.retries")) {
    c.retry_attempts = static_cast<int>(detail::to_integer("translator.retries", *v));
    if (c.retry_attempts < 1) throw ConfigError("'translator.retries' must be at least 1");
  }
  if (auto v = get("translator.backoff_ms")) {
    c.retry_backoff_ms = static_cast<int>(detail::to_integer("translator.backoff_ms", *v));
  }
  for (Language l : kAllLanguages) {
    const std::string key = "peer_file." + std::string(to_string(l));
    if (auto p = existing(key)) {
      if (l == c.language) throw ConfigError("'" + key + "' names the run language itself");
      c.peer_files[l] = *p;
    }
  }

  if (auto v = get("backend")) c.backend = *v;
  for (const auto& [key, value] : kv) {
    if (key.rfind("backend.", 0) == 0) c.backend_options[key.substr(8)] = value;
  }
  if (c.backend == "external" && c.backend_options.find("state_dir") == c.backend_options.end()) {
    c.backend_options["state_dir"] = (c.run_dir / "external_state").string();
  }
  {
    register_builtin_backends();
    auto names = BackendRegistry::instance().names();
    if (std::find(names.begin(), names.end(), c.backend) == names.end()) {
      throw ConfigError("unknown backend '" + c.backend + "' (registered: " + join(names, ", ") +
                        ")");
    }
  }
  if (auto v = get("hp.epochs")) c.hp.epochs = static_cast<int>(detail::to_integer("hp.epochs", *v));
  if (auto v = get("hp.batch_size")) {
    c.hp.batch_size = static_cast<int>(detail::to_integer("hp.batch_size", *v));
  }
  if (auto v = get("hp.stage1_lr")) c.hp.stage1_learning_rate = detail::to_real("hp.stage1_lr", *v);
  if (auto v = get("hp.stage2_lr")) c.hp.stage2_learning_rate = detail::to_real("hp.stage2_lr", *v);
  if (auto v = get("hp.optimizer")) c.hp.optimizer = *v;
  if (auto v = get("hp.schedule")) c.hp.lr_schedule = *v;
  if (auto v = get("hp.stage1_with_original")) {
    c.hp.stage1_includes_original = detail::to_bool("hp.stage1_with_original", *v);
  }
  c.commonsense_file = existing("commonsense_file");
  if (auto v = get("enriched")) c.enriched = detail::to_bool("enriched", *v);
  if (auto v = get("separator")) c.separator = *v;

  if (auto v = get("strategy")) c.strategy = *v;
  if (c.task == TaskMode::kBinary) {
    if (std::find(kStrategies.begin(), kStrategies.end(), c.strategy) == kStrategies.end()) {
      std::vector<std::string> names(kStrategies.begin(), kStrategies.end());
      throw ConfigError("unknown strategy '" + c.strategy + "' (valid: " + join(names, ", ") + ")");
    }
    if (c.strategy == "multi_task" && !c.commonsense_file) {
      throw ConfigError("strategy multi_task needs 'commonsense_file'");
    }
  }

  if (auto v = get("encoder")) c.encoder = *v;
  if (c.encoder != "hashed" && c.encoder.rfind("hashed:", 0) != 0 &&
      c.encoder.rfind("file:", 0) != 0) {
    throw ConfigError("unknown encoder '" + c.encoder +
                      "' (expected hashed, hashed:<dim> or file:<path>)");
  }
  if (c.encoder.rfind("file:", 0) == 0) {
    fs::path p = path_of(c.encoder.substr(5));
    if (!fs::exists(p)) throw ConfigError("encoder file is missing: " + p.string());
    c.encoder = "file:" + p.string();
  }
  if (auto v = get("regressor")) c.regressor = parse_regressor_kind(*v);
  if (auto v = get("knn.k")) {
    c.regressor_params.knn_k = static_cast<int>(detail::to_integer("knn.k", *v));
  }
  if (auto v = get("svr.epsilon")) c.regressor_params.svr_epsilon = detail::to_real("svr.epsilon", *v);
  if (auto v = get("svr.C")) c.regressor_params.svr_C = detail::to_real("svr.C", *v);
  if (auto v = get("svr.gamma")) c.regressor_params.svr_gamma = detail::to_real("svr.gamma", *v);
  if (c.regressor_params.svr_epsilon < 0.0) throw ConfigError("'svr.epsilon' must be >= 0");
  if (auto v = get("clamp")) c.clamp = detail::to_bool("clamp", *v);

  for (Language l : kAllLanguages) {
    const std::string key = "peer_run." + std::string(to_string(l));
    if (auto v = get(key)) c.peer_runs[l] = path_of(*v);
  }
  if (auto v = get("analyze.runs")) {
    for (const std::string& item : detail::to_list(*v)) {
      auto colon = item.find(':');
      if (colon == std::string::npos || colon == 0) {
        throw ConfigError("'analyze.runs' entries must look like name:path, got '" + item + "'");
      }
      c.analyze_runs.push_back({item.substr(0, colon), path_of(item.substr(colon + 1))});
    }
  }

  // The snapshot keeps values as written; run_dir and timestamps are
  // excluded so identical runs in different directories compare equal.
  kv.erase("run_dir");
  c.values = kv;
  return c;
}

}  // namespace taxo::cli

#endif  // TAXO_CLI_CONFIG_HPP_

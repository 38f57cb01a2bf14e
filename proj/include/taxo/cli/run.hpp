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

// The taxo command line: prepare | augment | train | predict | evaluate |
// analyze over a run directory. Exit codes: 0 ok, 2 config, 3 data,
// 4 provider.

#ifndef TAXO_CLI_RUN_HPP_
#define TAXO_CLI_RUN_HPP_

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "taxo/augment.hpp"
#include "taxo/backends.hpp"
#include "taxo/cli/config.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"
#include "taxo/encoder.hpp"
#include "taxo/eval.hpp"
#include "taxo/http_translator.hpp"
#include "taxo/pipeline.hpp"
#include "taxo/regressors.hpp"
#include "taxo/translation.hpp"

namespace taxo::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitProvider = 4;

inline int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return kExitConfig;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kProvider: return kExitProvider;
  }
  return kExitData;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string file_fingerprint(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

// Append-only view of a run directory. Every command declares its outputs
// up front; existing outputs are only replaced with --overwrite.
class RunDirectory {
 public:
  RunDirectory(fs::path root, bool overwrite) : root_(std::move(root)), overwrite_(overwrite) {}

  const fs::path& root() const { return root_; }
  fs::path path(const std::string& name) const { return root_ / name; }
  bool has(const std::string& name) const { return fs::exists(path(name)); }

  void claim(const std::vector<std::string>& names) const {
    if (overwrite_) return;
    for (const std::string& name : names) {
      if (has(name)) {
        throw ConfigError(path(name).string() +
                          " already exists; use a new run directory or pass --overwrite");
      }
    }
  }

  // Upstream artifact produced by `producer`.
  fs::path require(const std::string& name, const std::string& producer) const {
    if (!has(name)) {
      throw PreconditionError("missing " + path(name).string() + "; run `taxo " + producer +
                              "` first");
    }
    return path(name);
  }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(root_);
    const fs::path target = path(name);
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ValueError("cannot write " + tmp.string());
      out << content;
      if (!out) throw ValueError("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path root_;
  bool overwrite_;
  std::vector<std::string> written_;
};

// manifest.json reconstructs the run; wall-clock times go to
// timestamps.json so the manifest itself stays reproducible.
class Manifest {
 public:
  static constexpr const char* kFile = "manifest.json";
  static constexpr const char* kTimes = "timestamps.json";

  Manifest(const RunConfig& config, const RunDirectory& dir, bool overwrite) {
    nlohmann::json snapshot(config.values);
    if (fs::exists(dir.path(kFile))) {
      try {
        data_ = nlohmann::json::parse(read_file(dir.path(kFile)));
      } catch (const nlohmann::json::exception& e) {
        throw ValueError(dir.path(kFile).string() + ": " + e.what());
      }
      if (!overwrite && data_.value("config", nlohmann::json::object()) != snapshot) {
        throw ConfigError("run directory " + dir.root().string() +
                          " was created with a different config; use a new run directory or "
                          "pass --overwrite");
      }
    }
    data_["tool"] = "taxo";
    data_["version"] = std::string(kToolVersion);
    data_["seed"] = config.seed;
    data_["config"] = snapshot;
    if (fs::exists(dir.path(kTimes))) {
      try {
        times_ = nlohmann::json::parse(read_file(dir.path(kTimes)));
      } catch (const nlohmann::json::exception&) {
        times_ = nlohmann::json::object();
      }
    }
  }

  nlohmann::json& data() { return data_; }

  void record(const std::string& command, const RunDirectory& dir, nlohmann::json extra = {}) {
    nlohmann::json artifacts = nlohmann::json::object();
    for (const std::string& name : dir.written()) artifacts[name] = file_fingerprint(dir.path(name));
    nlohmann::json entry = {{"artifacts", artifacts}};
    if (extra.is_object()) entry.update(extra);
    data_["commands"][command] = entry;
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    times_[command] = buf;
  }

  void save(RunDirectory& dir) const {
    fs::create_directories(dir.root());
    for (const auto& [name, content] :
         {std::pair{std::string(kFile), data_.dump(2) + "\n"},
          std::pair{std::string(kTimes), times_.dump(2) + "\n"}}) {
      std::ofstream out(dir.path(name), std::ios::binary | std::ios::trunc);
      out << content;
    }
  }

 private:
  nlohmann::json data_ = nlohmann::json::object();
  nlohmann::json times_ = nlohmann::json::object();
};

// ---------------------------------------------------------------------------
// Shared helpers.

namespace detail {

inline std::string seed_comment(const RunConfig& c) { return "seed=" + std::to_string(c.seed); }

inline Corpus load_input(const RunConfig& c, const fs::path& path, std::optional<Language> lang) {
  return load_task_file(path, c.task, c.columns, lang);
}

inline Corpus load_artifact(const RunConfig& c, const fs::path& path, Language lang) {
  return load_task_file(path, c.task, ColumnMap{}, lang);
}

inline std::string corpus_file(const Corpus& corpus, TaskMode mode, const std::string& comment) {
  std::ostringstream out;
  write_task_file(out, corpus, mode, comment);
  return out.str();
}

inline std::set<Pattern> load_complex_patterns(const RunConfig& c) {
  std::set<Pattern> out;
  if (!c.complex_patterns) return out;
  std::ifstream in(*c.complex_patterns, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + c.complex_patterns->string());
  std::string line;
  while (read_line(in, line)) {
    std::string t(trim(line));
    if (t.empty() || t.front() == '#') continue;
    // "[blank]" is accepted as an alias of the placeholder.
    for (auto pos = t.find("[blank]"); pos != std::string::npos; pos = t.find("[blank]")) {
      t.replace(pos, 7, kPlaceholder);
    }
    if (count_placeholders(t) != 2) {
      throw ConfigError(c.complex_patterns->string() + ": pattern needs two slots: " + t);
    }
    out.insert(Pattern{t, c.language});
  }
  return out;
}

inline std::unique_ptr<ContextualFillModel> make_fill_model(const RunConfig& c) {
  if (c.fill_model == "fixed") return std::make_unique<FixedFillModel>(c.fill_words);
  std::ifstream in(*c.fill_lexicon, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + c.fill_lexicon->string());
  std::vector<std::string> inserts;
  std::vector<std::string> substitutes;
  std::string line;
  std::size_t row = 0;
  while (read_line(in, line)) {
    ++row;
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> f = split(line, '\t');
    if (f.size() != 2 || (f[0] != "insert" && f[0] != "substitute")) {
      throw ConfigError(c.fill_lexicon->string() + ": row " + std::to_string(row) +
                        ": expected 'insert|substitute<TAB>word'");
    }
    (f[0] == "insert" ? inserts : substitutes).push_back(f[1]);
  }
  return std::make_unique<LexiconFillModel>(inserts, substitutes);
}

inline std::unique_ptr<TranslationProvider> make_translator(const RunConfig& c) {
  if (c.translator == "identity") return std::make_unique<IdentityTranslator>();
  if (c.translator == "dictionary") {
    return std::make_unique<DictionaryTranslator>(DictionaryTranslator::load(*c.dictionary));
  }
  std::string endpoint =
      c.translator_endpoint.empty() ? std::string(kDefaultTranslateEndpoint) : c.translator_endpoint;
  return std::make_unique<HttpTranslator>(endpoint, translation_api_key(c.translator_key_env));
}

inline Corpus enrich(const Corpus& corpus, const RunConfig& c) {
  if (!c.enriched || corpus.empty()) return corpus;
  DfIndex df = build_df_index(corpus);
  Corpus out = corpus;
  for (Example& e : out.examples) {
    try {
      NounExtraction n = extract_nouns_or_fallback(e, df, c.noun_threshold);
      e.text = build_enriched_prompt(e, n.nouns, c.separator).text;
    } catch (const ExtractionError&) {
      warn("example '" + e.id + "' has no noun pair; left without prompt enrichment");
    }
  }
  return out;
}

struct ModelHeader {
  std::string backend;
  BackendOptions options;
  bool enriched = false;
  std::uint64_t seed = 0;
};

inline constexpr const char* kModelFile = "model.txt";
inline constexpr const char* kRegressorFile = "model.json";

inline std::string save_backend(const RunConfig& c, const ClassifierBackend& backend) {
  nlohmann::json header = {{"backend", c.backend},
                           {"options", nlohmann::json(c.backend_options)},
                           {"enriched", c.enriched},
                           {"seed", c.seed}};
  std::ostringstream out;
  out << "# " << header.dump() << "\n";
  backend.save(out);
  return out.str();
}

inline std::pair<ModelHeader, std::unique_ptr<ClassifierBackend>> load_backend(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  std::string first;
  read_line(in, first);
  if (first.rfind("# ", 0) != 0) throw ValueError(path.string() + ": missing model header");
  ModelHeader h;
  try {
    nlohmann::json j = nlohmann::json::parse(first.substr(2));
    h.backend = j.at("backend").get<std::string>();
    h.options = j.at("options").get<BackendOptions>();
    h.enriched = j.at("enriched").get<bool>();
    h.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(path.string() + ": bad model header: " + e.what());
  }
  auto backend = make_backend(h.backend, h.options);
  backend->load(in);
  return {h, std::move(backend)};
}

// Evaluation set: test_file when configured, otherwise the validation split.
inline Corpus evaluation_corpus(const RunConfig& c, const RunDirectory& dir, std::string* source) {
  if (c.test_file) {
    if (source) *source = "test";
    return load_input(c, *c.test_file, c.language);
  }
  if (source) *source = "val";
  return load_artifact(c, dir.require("val.tsv", "prepare"), c.language);
}

inline std::vector<std::string> read_prediction_column(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  std::string line;
  std::vector<std::string> header;
  std::vector<std::string> values;
  std::size_t column = 0;
  while (read_line(in, line)) {
    if (line.rfind('#', 0) == 0 || line.empty()) continue;
    std::vector<std::string> f = split(line, '\t');
    if (header.empty()) {
      header = f;
      auto it = std::find(header.begin(), header.end(), "prediction");
      if (it == header.end()) throw SchemaError(path.string() + ": no 'prediction' column");
      column = static_cast<std::size_t>(it - header.begin());
      continue;
    }
    if (column >= f.size()) throw ValueError(path.string() + ": short row");
    values.push_back(f[column]);
  }
  return values;
}

struct PredictionRow {
  std::string id;
  std::string text;
  std::string prediction;
  std::string gold;
};

inline std::vector<PredictionRow> read_predictions(const fs::path& path, std::string* source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  std::string line;
  bool header = false;
  std::vector<PredictionRow> rows;
  while (read_line(in, line)) {
    if (line.rfind('#', 0) == 0) {
      auto pos = line.find("eval=");
      if (source && pos != std::string::npos) *source = line.substr(pos + 5, line.find(' ', pos) - pos - 5);
      continue;
    }
    if (line.empty()) continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> f = split(line, '\t');
    if (f.size() != 4) throw ValueError(path.string() + ": expected 4 columns");
    rows.push_back({tsv_unescape(f[0]), tsv_unescape(f[1]), f[2], f[3]});
  }
  return rows;
}

inline int parse_label(const std::string& s, const std::string& where) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ValueError(where + ": label '" + s + "' is not 0 or 1");
}

inline double parse_score(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ValueError(where + ": score '" + s + "' is not a number");
}

inline nlohmann::json metric_json(const LanguageMetric& metric) {
  if (std::holds_alternative<BinaryMetrics>(metric)) {
    const auto& m = std::get<BinaryMetrics>(metric);
    return {{"kind", "binary"}, {"precision", m.precision}, {"recall", m.recall},
            {"f1", m.f1},       {"tp", m.tp},               {"fp", m.fp},
            {"fn", m.fn},       {"tn", m.tn},
            {"precision_undefined", m.precision_undefined},
            {"recall_undefined", m.recall_undefined}};
  }
  const auto& r = std::get<RhoResult>(metric);
  return {{"kind", "rho"}, {"rho", r.rho}, {"n", r.n}, {"tie_policy", r.tie_policy}};
}

inline LanguageMetric metric_from_json(const nlohmann::json& j) {
  if (j.at("kind") == "binary") {
    BinaryMetrics m;
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.tp = j.at("tp").get<std::size_t>();
    m.fp = j.at("fp").get<std::size_t>();
    m.fn = j.at("fn").get<std::size_t>();
    m.tn = j.at("tn").get<std::size_t>();
    m.precision_undefined = j.value("precision_undefined", false);
    m.recall_undefined = j.value("recall_undefined", false);
    return m;
  }
  RhoResult r;
  r.rho = j.at("rho").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.tie_policy = j.value("tie_policy", "average");
  return r;
}

inline std::string metrics_name(Language l, const char* ext) {
  return "metrics_" + std::string(to_string(l)) + ext;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each validates everything it needs before writing anything.

inline void cmd_prepare(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  const std::vector<std::string> outputs = {"dev.tsv", "val.tsv", "df_index.tsv", "patterns.tsv",
                                            "held_out_patterns.txt"};
  dir.claim(outputs);
  Corpus corpus = detail::load_input(c, c.train_file, c.language);
  std::set<Pattern> complex = detail::load_complex_patterns(c);
  DfIndex df = build_df_index(corpus);
  std::vector<PatternAnnotation> annotations = annotate_patterns(corpus, df, c.noun_threshold);
  std::vector<std::optional<Pattern>> patterns;
  for (const auto& a : annotations) patterns.push_back(a.pattern);
  DevValSplit split;
  try {
    split = split_dev_validation(corpus, patterns, complex, c.dev_fraction, c.seed);
  } catch (const Error& e) {
    throw Error(e.category(), "prepare: cannot split " + c.train_file.string() +
                                  " (dev_fraction=" + format_exact(c.dev_fraction) +
                                  ", complex patterns=" + std::to_string(complex.size()) +
                                  "): " + e.what());
  }

  const std::string comment = detail::seed_comment(c);
  dir.write("dev.tsv", detail::corpus_file(split.dev, c.task, comment));
  dir.write("val.tsv", detail::corpus_file(split.val, c.task, comment));

  std::ostringstream dfs;
  dfs << "# " << comment << " documents=" << df.documents << "\n";
  dfs << "token\tdf\n";
  for (const auto& [token, value] : df.df) dfs << tsv_escape(token) << '\t' << format_exact(value) << '\n';
  dir.write("df_index.tsv", dfs.str());

  std::set<std::size_t> dev(split.dev_indices.begin(), split.dev_indices.end());
  std::ostringstream pat;
  pat << "# " << comment << "\n";
  pat << "ID\tpattern\tnoun1\tnoun2\tfallback\tsplit\n";
  std::size_t fallbacks = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const PatternAnnotation& a = annotations[i];
    fallbacks += a.fallback ? 1 : 0;
    pat << tsv_escape(corpus.examples[i].id) << '\t'
        << (a.pattern ? tsv_escape(a.pattern->template_text) : "") << '\t'
        << (a.nouns ? tsv_escape(a.nouns->noun1) : "") << '\t'
        << (a.nouns ? tsv_escape(a.nouns->noun2) : "") << '\t' << (a.fallback ? 1 : 0) << '\t'
        << (dev.count(i) ? "dev" : "val") << '\n';
  }
  dir.write("patterns.tsv", pat.str());

  std::ostringstream held;
  held << "# " << comment << "\n";
  for (const Pattern& p : split.held_out_patterns) held << p.template_text << '\n';
  dir.write("held_out_patterns.txt", held.str());

  manifest.record("prepare", dir,
                  {{"datasets",
                    {{"train_file", fingerprint_corpus(corpus)},
                     {"dev", fingerprint_corpus(split.dev)},
                     {"val", fingerprint_corpus(split.val)}}},
                   {"noun_fallbacks", fallbacks}});
  std::cout << "prepare: dev=" << split.dev.size() << " val=" << split.val.size()
            << " held_out_patterns=" << split.held_out_patterns.size() << "\n";
}

inline void cmd_augment(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  if (c.task != TaskMode::kBinary) {
    throw ConfigError("augment applies to the binary task only");
  }
  // Credentials and providers are checked before anything is read or written.
  std::unique_ptr<TranslationProvider> provider;
  if (!c.peer_files.empty()) provider = detail::make_translator(c);
  std::unique_ptr<ContextualFillModel> fill = detail::make_fill_model(c);

  std::vector<std::string> outputs = {"nlpaug.tsv", "augment_summary.tsv"};
  for (const auto& [lang, path] : c.peer_files) {
    outputs.push_back("translated_" + std::string(to_string(lang)) + ".tsv");
  }
  dir.claim(outputs);
  Corpus dev = detail::load_artifact(c, dir.require("dev.tsv", "prepare"), c.language);
  std::vector<std::pair<Language, Corpus>> peers;
  for (const auto& [lang, path] : c.peer_files) peers.emplace_back(lang, detail::load_input(c, path, lang));
  Corpus reference = detail::load_input(c, c.train_file, c.language);

  const std::string comment = detail::seed_comment(c);
  AugmentOptions options;
  options.max_edits = c.max_edits;
  options.inserts_per_example = c.inserts_per_example;
  options.substitutes_per_positive = c.substitutes_per_positive;
  AugmentedCorpus nlpaug =
      augment_binary_corpus(dev, *fill, derive_seed(c.seed, {fnv1a64("nlpaug")}), options);
  {
    std::ostringstream out;
    write_augmented_file(out, nlpaug, c.task, comment);
    dir.write("nlpaug.tsv", out.str());
  }
  std::size_t skipped = 0;
  std::size_t positives = 0;
  for (const AugmentedExample& a : nlpaug.items) {
    skipped += a.skipped ? 1 : 0;
    positives += a.example.label.value_or(0) == 1 ? 1 : 0;
  }

  std::ostringstream summary;
  summary << "# " << comment << "\n";
  summary << "dataset\tsource_language\trows\tlabel1_rows\tskipped\tfailed\tconsidered\tdropped"
             "\tdropped_pct\n";
  summary << "nlpaug\t" << to_string(c.language) << '\t' << nlpaug.size() << '\t' << positives
          << '\t' << skipped << "\t0\t" << nlpaug.size() << "\t0\t0.00\n";

  if (provider) {
    TranslationCache cache(dir.path("translation_cache.tsv"));
    RetryPolicy retry;
    retry.max_attempts = c.retry_attempts;
    retry.initial_backoff = std::chrono::milliseconds(c.retry_backoff_ms);
    CachedTranslator translator(*provider, cache, retry);
    TranslateOptions t;
    t.max_in_flight = c.max_in_flight;
    for (const auto& [lang, peer] : peers) {
      AugmentedCorpus translated = translate_corpus(peer, c.language, translator, t);
      std::size_t failed = 0;
      for (const auto& item : translated.items) failed += item.failed ? 1 : 0;
      DedupeResult d = dedupe_against(translated, reference);
      std::ostringstream out;
      write_augmented_file(out, d.kept, c.task, comment);
      const std::string name = "translated_" + std::string(to_string(lang)) + ".tsv";
      dir.write(name, out.str());
      std::size_t kept_pos = 0;
      for (const auto& item : d.kept.items) kept_pos += item.example.label.value_or(0) == 1 ? 1 : 0;
      summary << "translated_" << to_string(lang) << '\t' << to_string(lang) << '\t'
              << d.kept.size() << '\t' << kept_pos << "\t0\t" << failed << '\t' << d.considered
              << '\t' << d.dropped << '\t' << format_fixed(100.0 * d.dropped_fraction(), 2)
              << '\n';
      std::cout << "augment: translated " << to_string(lang) << " -> " << to_string(c.language)
                << ": kept " << d.kept.size() << " of " << d.considered << " (dedupe dropped "
                << format_fixed(100.0 * d.dropped_fraction(), 2) << "%)\n";
    }
    std::cout << "augment: translation provider calls=" << translator.provider_calls() << "\n";
  }
  dir.write("augment_summary.tsv", summary.str());
  manifest.record("augment", dir, {{"datasets", {{"nlpaug", fingerprint_corpus(nlpaug.to_corpus())}}}});
  std::cout << "augment: nlpaug rows=" << nlpaug.size() << " (skipped " << skipped << ")\n";
}

inline void cmd_train(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  if (c.task == TaskMode::kLikert) {
    dir.claim({detail::kRegressorFile, "trace.jsonl"});
    std::unique_ptr<SentenceEncoder> encoder = make_encoder(c.encoder);
    Corpus dev = detail::load_artifact(c, dir.require("dev.tsv", "prepare"), c.language);
    RegressorModel model =
        train_regressor(encode_corpus(*encoder, dev), corpus_scores(dev), c.regressor, c.regressor_params);
    nlohmann::json j = {{"seed", c.seed}, {"encoder", c.encoder}, {"regressor", model.to_json()}};
    dir.write(detail::kRegressorFile, j.dump() + "\n");
    nlohmann::json event = {{"event", "fit"},
                            {"seed", c.seed},
                            {"regressor", std::string(to_string(c.regressor))},
                            {"encoder", c.encoder},
                            {"examples", dev.size()},
                            {"dataset", fingerprint_corpus(dev)}};
    dir.write("trace.jsonl", event.dump() + "\n");
    manifest.record("train", dir, {{"trace", nlohmann::json::array({event})}});
    std::cout << "train: fitted " << to_string(c.regressor) << " on " << dev.size() << " examples\n";
    return;
  }

  // Which handles does the strategy read?
  std::set<std::string> all = {std::string(kOriginalData), std::string(kNlpaugData),
                               std::string(kTranslatedData), std::string(kCommonsenseData)};
  TrainingPlan shape = build_training_plan(c.strategy, c.language, all, c.hp);
  std::set<std::string> needed;
  for (const StageConfig& s : shape.stages) needed.insert(s.datasets.begin(), s.datasets.end());
  if (needed.count(std::string(kTranslatedData)) && c.peer_files.empty()) {
    throw ConfigError("strategy " + c.strategy + " needs translated data; set peer_file.<lang>");
  }
  std::unique_ptr<ClassifierBackend> backend = make_backend(c.backend, c.backend_options);
  dir.claim({"plan.json", "trace.jsonl", detail::kModelFile});

  std::map<std::string, Corpus> datasets;
  for (const std::string& handle : needed) {
    if (handle == kOriginalData) {
      datasets[handle] = detail::load_artifact(c, dir.require("dev.tsv", "prepare"), c.language);
    } else if (handle == kNlpaugData) {
      datasets[handle] = detail::load_artifact(c, dir.require("nlpaug.tsv", "augment"), c.language);
    } else if (handle == kTranslatedData) {
      Corpus joined;
      joined.language = c.language;
      for (const auto& [lang, path] : c.peer_files) {
        Corpus part = detail::load_artifact(
            c, dir.require("translated_" + std::string(to_string(lang)) + ".tsv", "augment"),
            c.language);
        joined.examples.insert(joined.examples.end(), part.examples.begin(), part.examples.end());
      }
      datasets[handle] = std::move(joined);
    } else if (handle == kCommonsenseData) {
      std::ifstream in(*c.commonsense_file, std::ios::binary);
      datasets[handle] = relabel_commonsense(parse_commonsense_file(in));
      datasets[handle].language = c.language;
    }
  }
  for (auto& [handle, corpus] : datasets) corpus = detail::enrich(corpus, c);

  std::set<std::string> available;
  for (const auto& entry : datasets) available.insert(entry.first);
  TrainingPlan plan = build_training_plan(c.strategy, c.language, available, c.hp);
  nlohmann::json plan_json = to_json(plan);
  plan_json["seed"] = c.seed;
  plan_json["backend"] = c.backend;
  dir.write("plan.json", plan_json.dump(2) + "\n");

  ExecutionTrace trace;
  try {
    trace = execute_plan(plan, datasets, *backend, c.seed);
  } catch (const StageFailure& failure) {
    dir.write("trace.jsonl", trace_to_jsonl(failure.trace()));
    manifest.record("train", dir, {{"status", "failed"}});
    throw;
  }
  dir.write("trace.jsonl", trace_to_jsonl(trace));
  dir.write(detail::kModelFile, detail::save_backend(c, *backend));

  nlohmann::json stages = nlohmann::json::array();
  std::istringstream lines(trace_to_jsonl(trace));
  for (std::string line; std::getline(lines, line);) stages.push_back(nlohmann::json::parse(line));
  nlohmann::json fingerprints = nlohmann::json::object();
  for (const auto& [name, corpus] : datasets) fingerprints[name] = fingerprint_corpus(corpus);
  manifest.record("train", dir, {{"trace", stages}, {"datasets", fingerprints}});
  std::cout << "train: " << plan.strategy << " with " << c.backend << ", " << plan.stages.size()
            << " stage(s), fingerprint " << backend->fingerprint() << "\n";
}

inline void cmd_predict(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  dir.claim({"predictions.tsv"});
  std::string source;
  Corpus eval = detail::evaluation_corpus(c, dir, &source);
  std::vector<std::string> predictions;
  if (c.task == TaskMode::kLikert) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(dir.require(detail::kRegressorFile, "train")));
    } catch (const nlohmann::json::exception& e) {
      throw ValueError(std::string("model.json: ") + e.what());
    }
    std::unique_ptr<SentenceEncoder> encoder = make_encoder(j.at("encoder").get<std::string>());
    RegressorModel model = RegressorModel::from_json(j.at("regressor"));
    for (double v : predict_scores(model, encode_corpus(*encoder, eval), c.clamp)) {
      predictions.push_back(format_exact(v));
    }
  } else {
    auto [header, backend] = detail::load_backend(dir.require(detail::kModelFile, "train"));
    RunConfig view = c;
    view.enriched = header.enriched;
    Corpus inputs = detail::enrich(eval, view);
    for (int label : predict_labels(*backend, inputs)) predictions.push_back(std::to_string(label));
  }
  std::ostringstream out;
  out << "# " << detail::seed_comment(c) << " eval=" << source << "\n";
  out << "ID\tSentence\tprediction\tgold\n";
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const Example& e = eval.examples[i];
    std::string gold = e.label ? std::to_string(*e.label) : e.score ? format_exact(*e.score) : "";
    out << tsv_escape(e.id) << '\t' << tsv_escape(e.text) << '\t' << predictions[i] << '\t' << gold
        << '\n';
  }
  dir.write("predictions.tsv", out.str());
  manifest.record("predict", dir, {{"eval", source}, {"dataset", fingerprint_corpus(eval)}});
  std::cout << "predict: " << eval.size() << " predictions on the " << source << " set\n";
}

inline void cmd_evaluate(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  const Language lang = c.language;
  std::vector<std::string> outputs = {detail::metrics_name(lang, ".tsv"),
                                      detail::metrics_name(lang, ".md"),
                                      detail::metrics_name(lang, ".json")};
  if (!c.peer_runs.empty()) {
    outputs.push_back("global.tsv");
    outputs.push_back("global.md");
  }
  dir.claim(outputs);
  Corpus gold = detail::evaluation_corpus(c, dir, nullptr);
  std::vector<std::string> raw = detail::read_prediction_column(dir.require("predictions.tsv", "predict"));
  if (raw.size() != gold.size()) {
    throw ShapeError("predictions.tsv has " + std::to_string(raw.size()) + " rows but the gold set has " +
                     std::to_string(gold.size()));
  }
  LanguageMetric metric;
  if (c.task == TaskMode::kBinary) {
    std::vector<int> preds;
    std::vector<int> golds;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      preds.push_back(detail::parse_label(raw[i], "predictions.tsv row " + std::to_string(i + 1)));
      golds.push_back(gold.examples[i].label.value_or(-1));
    }
    metric = binary_metrics(preds, golds);
  } else {
    std::vector<double> preds;
    std::vector<double> golds;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      preds.push_back(detail::parse_score(raw[i], "predictions.tsv row " + std::to_string(i + 1)));
      if (!gold.examples[i].score) throw ValueError("gold example '" + gold.examples[i].id + "' has no score");
      golds.push_back(*gold.examples[i].score);
    }
    metric = spearman_rho(preds, golds);
  }

  MetricsReport own;
  own.per_language[lang] = metric;
  // Peer metrics are read before anything is written.
  MetricsReport all = own;
  for (const auto& [peer_lang, peer_dir] : c.peer_runs) {
    if (peer_lang == lang) continue;
    const fs::path file = peer_dir / detail::metrics_name(peer_lang, ".json");
    if (!fs::exists(file)) {
      throw PreconditionError("missing " + file.string() + "; run `taxo evaluate` in that run first");
    }
    try {
      all.per_language[peer_lang] = detail::metric_from_json(nlohmann::json::parse(read_file(file)).at("metric"));
    } catch (const nlohmann::json::exception& e) {
      throw ValueError(file.string() + ": " + e.what());
    }
  }
  std::optional<double> global;
  if (!c.peer_runs.empty()) global = all.global();

  dir.write(outputs[0], emit_report(own, ReportFormat::kTsv));
  dir.write(outputs[1], emit_report(own, ReportFormat::kMarkdown));
  nlohmann::json mj = {{"seed", c.seed},
                       {"language", std::string(to_string(lang))},
                       {"task", std::string(to_string(c.task))},
                       {"metric", detail::metric_json(metric)}};
  dir.write(outputs[2], mj.dump(2) + "\n");
  if (global) {
    dir.write("global.tsv", emit_report(all, ReportFormat::kTsv));
    dir.write("global.md", emit_report(all, ReportFormat::kMarkdown));
  }
  nlohmann::json extra = {{"metrics", outputs}};
  if (global) extra["global"] = *global;
  manifest.record("evaluate", dir, extra);
  std::cout << emit_report(global ? all : own, ReportFormat::kTsv);
}

inline void cmd_analyze(const RunConfig& c, RunDirectory& dir, Manifest& manifest) {
  if (c.task != TaskMode::kBinary) throw ConfigError("analyze applies to the binary task only");
  std::vector<NamedRun> runs = c.analyze_runs;
  if (runs.empty()) runs.push_back({c.strategy, dir.root()});
  const std::vector<std::string> outputs = {"pattern_errors.tsv", "pattern_errors.md",
                                            "pattern_errors_plot.tsv", "comparison.tsv"};
  dir.claim(outputs);

  PatternErrorReport report;
  std::ostringstream comparison;
  comparison << "model\trecall\tprecision\tf1\n";
  for (const NamedRun& run : runs) {
    RunDirectory other(run.dir, false);
    std::string source = "val";
    std::vector<detail::PredictionRow> rows =
        detail::read_predictions(other.require("predictions.tsv", "predict"), &source);
    // Patterns as derived at prepare time; sentences outside the prepared
    // corpus get patterns from a DF index over the evaluated set.
    std::map<std::string, std::string> by_id;
    std::set<std::string> training;
    {
      std::ifstream in(other.require("patterns.tsv", "prepare"), std::ios::binary);
      std::string line;
      bool header = false;
      while (read_line(in, line)) {
        if (line.rfind('#', 0) == 0 || line.empty()) continue;
        if (!header) {
          header = true;
          continue;
        }
        std::vector<std::string> f = split(line, '\t');
        if (f.size() != 6) throw ValueError(other.path("patterns.tsv").string() + ": expected 6 columns");
        std::string pattern = tsv_unescape(f[1]);
        by_id[tsv_unescape(f[0])] = pattern;
        if (f[5] == "dev" && !pattern.empty()) training.insert(pattern);
      }
    }
    std::vector<std::string> patterns(rows.size());
    if (source == "val") {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto it = by_id.find(rows[i].id);
        patterns[i] = it == by_id.end() ? "" : it->second;
      }
    } else {
      Corpus eval;
      eval.language = c.language;
      for (const auto& r : rows) eval.examples.push_back(Example{r.id, r.text, c.language, {}, {}, {}});
      DfIndex df = build_df_index(eval);
      auto ann = annotate_patterns(eval, df, c.noun_threshold);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        patterns[i] = ann[i].pattern ? ann[i].pattern->template_text : "";
      }
    }
    std::vector<int> preds;
    std::vector<int> golds;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = run.name + " predictions row " + std::to_string(i + 1);
      preds.push_back(detail::parse_label(rows[i].prediction, where));
      golds.push_back(detail::parse_label(rows[i].gold, where));
      if (patterns[i].empty()) patterns[i] = "(no pattern)";
    }
    report.merge(per_pattern_errors(preds, golds, patterns, training, run.name));
    BinaryMetrics m = binary_metrics(preds, golds);
    comparison << run.name << '\t' << format_fixed(100.0 * m.recall, 2) << '\t'
               << format_fixed(100.0 * m.precision, 2) << '\t' << format_fixed(100.0 * m.f1, 2)
               << '\n';
  }
  dir.write("pattern_errors.tsv", emit_report(report, ReportFormat::kTsv));
  dir.write("pattern_errors.md", emit_report(report, ReportFormat::kMarkdown));
  dir.write("pattern_errors_plot.tsv", emit_report(report, ReportFormat::kPlotData));
  dir.write("comparison.tsv", comparison.str());
  manifest.record("analyze", dir);
  std::cout << "analyze: " << report.rows.size() << " pattern rows over " << runs.size()
            << " run(s)\n";
}

// ---------------------------------------------------------------------------
// Entry point, callable in-process.

inline int main(int argc, char** argv) {
  CLI::App app{"taxo: taxonomy-acceptability experiment pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string run_dir;
  std::string language;
  std::string strategy;
  bool overwrite = false;
  app.set_version_flag("--version", std::string(kToolVersion));

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&, RunDirectory&, Manifest&);
  };
  const std::vector<Command> commands = {
      {"prepare", "Split the input into dev/val and extract patterns", cmd_prepare},
      {"augment", "Build the contextual-edit and translated datasets", cmd_augment},
      {"train", "Run the training strategy (or fit the regressor)", cmd_train},
      {"predict", "Predict labels or scores for the evaluation set", cmd_predict},
      {"evaluate", "Write metric reports (and global scores with peer runs)", cmd_evaluate},
      {"analyze", "Per-pattern error analysis across named runs", cmd_analyze},
  };
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--run-dir", run_dir, "Override the configured run directory");
    sub->add_option("--language", language, "Override the configured language (en, fr, it)");
    sub->add_option("--strategy", strategy, "Override the configured training strategy");
    sub->add_flag("--overwrite", overwrite, "Allow replacing artifacts in an existing run directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const Command* selected = nullptr;
  for (const Command& cmd : commands) {
    if (app.got_subcommand(cmd.name)) selected = &cmd;
  }
  try {
    CommandLineOverrides o;
    o.seed = seed;
    if (!run_dir.empty()) o.run_dir = run_dir;
    if (!language.empty()) o.language = language;
    if (!strategy.empty()) o.strategy = strategy;
    RunConfig config = load_run_config(config_path, o);
    RunDirectory dir(config.run_dir, overwrite);
    Manifest manifest(config, dir, overwrite);
    try {
      selected->run(config, dir, manifest);
    } catch (...) {
      if (!dir.written().empty()) manifest.save(dir);
      throw;
    }
    manifest.save(dir);
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "taxo " << selected->name << ": error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "taxo " << selected->name << ": error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "taxo " << selected->name << ": error: malformed data: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace taxo::cli

#endif  // TAXO_CLI_RUN_HPP_

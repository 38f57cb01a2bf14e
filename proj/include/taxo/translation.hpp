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

// Cross-language augmentation: provider interface, persistent response
// cache, retrying front end and duplicate filtering.

#ifndef TAXO_TRANSLATION_HPP_
#define TAXO_TRANSLATION_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "taxo/augment.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

// Implementations must be safe to call from several threads when used with
// max_in_flight > 1. Failures are reported by throwing ProviderError.
class TranslationProvider {
 public:
  virtual ~TranslationProvider() = default;
  virtual std::string translate(const std::string& text, Language source,
                                Language target) = 0;
};

class IdentityTranslator : public TranslationProvider {
 public:
  std::string translate(const std::string& text, Language, Language) override { return text; }
};

// Word-for-word lookup through a bilingual dictionary; unknown words pass
// through and attached punctuation is kept. Matching is case-insensitive and
// a capitalized source word yields a capitalized output word.
class DictionaryTranslator : public TranslationProvider {
 public:
  void add(Language source, Language target, const std::string& word,
           const std::string& translation) {
    entries_[{source, target, case_fold(word)}] = translation;
  }

  // Lines of "src<TAB>tgt<TAB>word<TAB>translation"; '#' lines are comments.
  static DictionaryTranslator load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dictionary " + path.string());
    DictionaryTranslator dict;
    std::string line;
    std::size_t row = 0;
    while (read_line(in, line)) {
      ++row;
      if (trim(line).empty() || line[0] == '#') continue;
      std::vector<std::string> f = split(line, '\t');
      if (f.size() != 4) {
        throw ConfigError(path.string() + ": row " + std::to_string(row) +
                          ": expected 4 tab-separated fields");
      }
      dict.add(parse_language(f[0]), parse_language(f[1]), f[2], f[3]);
    }
    return dict;
  }

  std::string translate(const std::string& text, Language source, Language target) override {
    std::vector<std::string> words;
    for (const Token& chunk : whitespace_chunks(text)) {
      Span core = punctuation_core(chunk.text);
      std::string word = chunk.text.substr(core.begin, core.length());
      auto it = entries_.find({source, target, case_fold(word)});
      if (core.length() > 0 && it != entries_.end()) {
        std::string replacement = it->second;
        if (!word.empty() && word[0] >= 'A' && word[0] <= 'Z' && !replacement.empty() &&
            replacement[0] >= 'a' && replacement[0] <= 'z') {
          replacement[0] = static_cast<char>(replacement[0] - 32);
        }
        word = replacement;
      }
      std::string rebuilt = chunk.text.substr(0, core.begin) + word + chunk.text.substr(core.end);
      // An empty translation drops the word.
      if (!rebuilt.empty()) words.push_back(std::move(rebuilt));
    }
    return join(words, " ");
  }

 private:
  std::map<std::tuple<Language, Language, std::string>, std::string> entries_;
};

// ---------------------------------------------------------------------------
// Persistent cache: one record per line, "src<TAB>tgt<TAB>input<TAB>output",
// cells escaped. Writes are serialized and flushed per record.

class TranslationCache {
 public:
  TranslationCache() = default;

  explicit TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    std::size_t row = 0;
    while (in && read_line(in, line)) {
      ++row;
      if (line.empty()) continue;
      std::vector<std::string> f = split(line, '\t');
      if (f.size() != 4) {
        throw ValueError(path_.string() + ": row " + std::to_string(row) +
                         ": malformed cache record");
      }
      entries_[{parse_language(f[0]), parse_language(f[1]), tsv_unescape(f[2])}] =
          tsv_unescape(f[3]);
    }
  }

  std::optional<std::string> lookup(const std::string& text, Language source,
                                    Language target) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find({source, target, text});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& text, Language source, Language target,
             const std::string& translation) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = entries_.try_emplace({source, target, text}, translation);
    if (!inserted || path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw ValueError("cannot append to translation cache " + path_.string());
    out << to_string(source) << '\t' << to_string(target) << '\t' << tsv_escape(text) << '\t'
        << tsv_escape(translation) << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::tuple<Language, Language, std::string>, std::string> entries_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

// Cache-first front end over a provider with exponential backoff.
class CachedTranslator {
 public:
  CachedTranslator(TranslationProvider& provider, TranslationCache& cache,
                   RetryPolicy retry = {})
      : provider_(provider), cache_(cache), retry_(std::move(retry)) {}

  // nullopt after max_attempts consecutive provider failures.
  std::optional<std::string> translate(const std::string& text, Language source,
                                       Language target) {
    if (auto hit = cache_.lookup(text, source, target)) return hit;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      ++provider_calls_;
      try {
        std::string out = provider_.translate(text, source, target);
        cache_.store(text, source, target, out);
        return out;
      } catch (const ProviderError& e) {
        if (attempt == retry_.max_attempts) {
          warn(std::string("translation failed after ") + std::to_string(attempt) +
               " attempts: " + e.what());
          break;
        }
        if (retry_.sleep) retry_.sleep(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * retry_.multiplier));
      }
    }
    return std::nullopt;
  }

  std::size_t provider_calls() const { return provider_calls_.load(); }

 private:
  TranslationProvider& provider_;
  TranslationCache& cache_;
  RetryPolicy retry_;
  std::atomic<std::size_t> provider_calls_{0};
};

struct TranslateOptions {
  std::size_t max_in_flight = 1;
};

// Translates every example into `target`, copying labels/scores and
// recording the source language. Per-example failures are flagged and the
// batch continues. Output order follows the input.
inline AugmentedCorpus translate_corpus(const Corpus& corpus, Language target,
                                        CachedTranslator& translator,
                                        const TranslateOptions& options = {}) {
  if (corpus.language == target) {
    throw PreconditionError("corpus is already in " + std::string(to_string(target)));
  }
  AugmentedCorpus out;
  out.language = target;
  out.items.resize(corpus.size());
  const std::string suffix = ":tr-" + std::string(to_string(corpus.language));

  auto work = [&](std::size_t i) {
    const Example& source = corpus.examples[i];
    AugmentedExample& item = out.items[i];
    item.source_id = source.id;
    item.operation = AugmentOperation::kTranslate;
    item.edits = 0;
    item.source_language = corpus.language;
    item.example = source;
    item.example.id = source.id + suffix;
    item.example.language = target;
    item.example.flags.clear();
    std::optional<std::string> text = translator.translate(source.text, corpus.language, target);
    if (text && !collapse_whitespace(*text).empty()) {
      std::string clean = *text;
      for (char& c : clean) {
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
      }
      item.example.text = std::string(trim(clean));
    } else {
      item.failed = true;
      item.example.flags.emplace_back(kTranslationFailedFlag);
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, options.max_in_flight);
  if (workers == 1 || corpus.size() < 2) {
    for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, corpus.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) work(i);
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Duplicate filtering.

inline std::string normalize_for_dedupe(std::string_view text) {
  return case_fold(collapse_whitespace(text));
}

struct DedupeResult {
  AugmentedCorpus kept;
  std::size_t considered = 0;
  std::size_t dropped = 0;

  double dropped_fraction() const {
    return considered == 0 ? 0.0
                           : static_cast<double>(dropped) / static_cast<double>(considered);
  }
};

// Drops translated sentences whose normalized text matches any reference
// sentence. Failed translations are not counted.
inline DedupeResult dedupe_against(const AugmentedCorpus& translated, const Corpus& reference) {
  if (translated.language != reference.language) {
    throw PreconditionError("dedupe requires matching languages");
  }
  std::set<std::string> seen;
  for (const Example& e : reference.examples) seen.insert(normalize_for_dedupe(e.text));
  DedupeResult result;
  result.kept.language = translated.language;
  for (const AugmentedExample& item : translated.items) {
    if (item.failed) continue;
    ++result.considered;
    if (seen.count(normalize_for_dedupe(item.example.text))) {
      ++result.dropped;
    } else {
      result.kept.items.push_back(item);
    }
  }
  return result;
}

}  // namespace taxo

#endif  // TAXO_TRANSLATION_HPP_

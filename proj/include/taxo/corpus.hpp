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

// Task-format corpora: parsing, document frequencies, noun-pair extraction,
// sentence patterns and pattern-held-out development/validation splits.

#ifndef TAXO_CORPUS_HPP_
#define TAXO_CORPUS_HPP_

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "taxo/common.hpp"

namespace taxo {

enum class TaskMode { kBinary, kLikert };

inline std::string_view to_string(TaskMode mode) {
  return mode == TaskMode::kBinary ? "binary" : "likert";
}

inline TaskMode parse_task_mode(std::string_view s) {
  if (s == "binary") return TaskMode::kBinary;
  if (s == "likert") return TaskMode::kLikert;
  throw ConfigError("unknown task '" + std::string(s) +
                    "' (expected binary or likert)");
}

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 7.0;

struct Example {
  std::string id;
  std::string text;
  Language language = Language::kEn;
  std::optional<int> label;
  std::optional<double> score;
  // Free-form markers such as "noun_fallback"; never affect the label.
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
  }
};

struct Corpus {
  Language language = Language::kEn;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// ---------------------------------------------------------------------------
// Tokenizer: whitespace split, then leading/trailing punctuation stripped.
// Spans are byte offsets of the stripped token inside the sentence and keep
// the original casing.

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t length() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string text;
  Span span;
};

namespace detail {

// Multi-byte punctuation common in French and Italian text.
inline constexpr std::array<std::string_view, 9> kWidePunctuation = {
    "\xC2\xAB", "\xC2\xBB", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98",
    "\xE2\x80\x99", "\xE2\x80\xA6", "\xE2\x80\x94", "\xE2\x80\x93"};

inline std::size_t punctuation_prefix(std::string_view s) {
  if (s.empty()) return 0;
  unsigned char c = static_cast<unsigned char>(s.front());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kWidePunctuation) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

inline std::size_t punctuation_suffix(std::string_view s) {
  if (s.empty()) return 0;
  unsigned char c = static_cast<unsigned char>(s.back());
  if (c < 0x80) return std::ispunct(c) ? 1 : 0;
  for (std::string_view p : kWidePunctuation) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) {
      return p.size();
    }
  }
  return 0;
}

inline bool is_nbsp(std::string_view s, std::size_t i) {
  return i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC2 &&
         static_cast<unsigned char>(s[i + 1]) == 0xA0;
}

}  // namespace detail

// Raw whitespace-delimited chunks with their spans (punctuation kept).
inline std::vector<Token> whitespace_chunks(std::string_view text) {
  std::vector<Token> chunks;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (is_space_byte(text[i]) || detail::is_nbsp(text, i))) {
      i += detail::is_nbsp(text, i) ? 2 : 1;
    }
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space_byte(text[i]) && !detail::is_nbsp(text, i)) {
      ++i;
    }
    chunks.push_back({std::string(text.substr(start, i - start)), {start, i}});
  }
  return chunks;
}

// Strips punctuation from both ends of a chunk; returns the core's span
// relative to the chunk start, empty if the chunk is all punctuation.
inline Span punctuation_core(std::string_view chunk) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  while (begin < end) {
    std::size_t n = detail::punctuation_prefix(chunk.substr(begin, end - begin));
    if (n == 0) break;
    begin += n;
  }
  while (end > begin) {
    std::size_t n = detail::punctuation_suffix(chunk.substr(begin, end - begin));
    if (n == 0) break;
    end -= n;
  }
  return {begin, end};
}

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  for (const Token& chunk : whitespace_chunks(text)) {
    Span core = punctuation_core(chunk.text);
    if (core.length() == 0) continue;
    tokens.push_back({chunk.text.substr(core.begin, core.length()),
                      {chunk.span.begin + core.begin, chunk.span.begin + core.end}});
  }
  return tokens;
}

// Case-folded token strings, as used for frequency statistics and features.
inline std::vector<std::string> folded_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& token : tokenize(text)) out.push_back(case_fold(token.text));
  return out;
}

// ---------------------------------------------------------------------------
// Parsing.

// Header names of the identifier, sentence and value columns. An empty
// value column selects the mode's default ("Labels" or "Score").
struct ColumnMap {
  std::string id = "ID";
  std::string text = "Sentence";
  std::string value;
};

// "train_en.tsv" -> en. Returns nullopt when the stem has no language suffix.
inline std::optional<Language> language_from_path(const std::filesystem::path& path) {
  std::string stem = path.stem().string();
  if (stem.size() < 3 || stem[stem.size() - 3] != '_') return std::nullopt;
  std::string code = case_fold(stem.substr(stem.size() - 2));
  if (code == "en") return Language::kEn;
  if (code == "fr") return Language::kFr;
  if (code == "it") return Language::kIt;
  return std::nullopt;
}

namespace detail {

inline std::size_t find_column(const std::vector<std::string>& header,
                               const std::string& name) {
  std::string wanted = case_fold(trim(name));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (case_fold(trim(header[i])) == wanted) return i;
  }
  throw SchemaError("missing column '" + name + "' in header");
}

inline std::string row_context(std::size_t row) {
  return "row " + std::to_string(row) + ": ";
}

}  // namespace detail

// Parses a tab-separated task file with a header row. Leading '#' lines are
// treated as comments; blank lines are ignored. Any malformed data row
// raises instead of being dropped. Cells are read with backslash escapes
// (\t, \n, \\) so files written by write_task_file round-trip.
inline Corpus parse_task_file(std::istream& in, TaskMode mode,
                              const ColumnMap& columns, Language language) {
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  std::vector<std::string> header;
  while (read_line(in, line)) {
    ++row;
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.rfind('#', 0) == 0) continue;
    if (trim(line).empty()) continue;
    header = split(line, '\t');
    have_header = true;
    break;
  }
  if (!have_header) throw SchemaError("missing header row");

  std::string value_name = columns.value;
  if (value_name.empty()) value_name = mode == TaskMode::kBinary ? "Labels" : "Score";
  const std::size_t id_col = detail::find_column(header, columns.id);
  const std::size_t text_col = detail::find_column(header, columns.text);
  const std::size_t value_col = detail::find_column(header, value_name);
  const std::size_t needed = std::max({id_col, text_col, value_col}) + 1;

  Corpus corpus;
  corpus.language = language;
  while (read_line(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() < needed) {
      throw ValueError(detail::row_context(row) + "expected at least " +
                       std::to_string(needed) + " fields, found " +
                       std::to_string(fields.size()));
    }
    Example example;
    example.id = tsv_unescape(trim(fields[id_col]));
    example.text = tsv_unescape(trim(fields[text_col]));
    example.language = language;
    if (example.id.empty()) throw ValueError(detail::row_context(row) + "empty id");
    if (collapse_whitespace(example.text).empty()) {
      throw ValueError(detail::row_context(row) + "empty sentence");
    }
    std::string value(trim(fields[value_col]));
    if (mode == TaskMode::kBinary) {
      if (value == "0" || value == "1") {
        example.label = value == "1" ? 1 : 0;
      } else {
        throw ValueError(detail::row_context(row) + "label '" + value +
                         "' is not in {0,1}");
      }
    } else {
      char* end = nullptr;
      errno = 0;
      double score = std::strtod(value.c_str(), &end);
      if (value.empty() || end != value.c_str() + value.size() || errno != 0 ||
          !std::isfinite(score) || score < kMinScore || score > kMaxScore) {
        throw ValueError(detail::row_context(row) + "score '" + value +
                         "' is not a number in [1,7]");
      }
      example.score = score;
    }
    corpus.examples.push_back(std::move(example));
  }
  return corpus;
}

inline Corpus load_task_file(const std::filesystem::path& path, TaskMode mode,
                             const ColumnMap& columns,
                             std::optional<Language> language = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot open " + path.string());
  std::optional<Language> inferred = language ? language : language_from_path(path);
  if (!inferred) {
    throw ConfigError("cannot infer language of " + path.string() +
                      " (name it *_en/_fr/_it or pass the language explicitly)");
  }
  try {
    return parse_task_file(in, mode, columns, *inferred);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  } catch (const ValueError& e) {
    throw ValueError(path.string() + ": " + e.what());
  }
}

// Writes the corpus back in task format (ID, Sentence, Labels|Score).
inline void write_task_file(std::ostream& out, const Corpus& corpus, TaskMode mode,
                            std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "ID\tSentence\t" << (mode == TaskMode::kBinary ? "Labels" : "Score") << '\n';
  for (const Example& e : corpus.examples) {
    out << tsv_escape(e.id) << '\t' << tsv_escape(e.text) << '\t';
    if (mode == TaskMode::kBinary) {
      out << e.label.value_or(0);
    } else {
      out << format_exact(e.score.value_or(kMinScore));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Document frequencies.

struct DfIndex {
  std::map<std::string, double> df;
  std::size_t documents = 0;

  // Tokens never seen in the indexed corpus have frequency 0.
  double of(std::string_view folded_token) const {
    auto it = df.find(std::string(folded_token));
    return it == df.end() ? 0.0 : it->second;
  }
};

// df(t) = (# examples whose token set contains t) / (# examples).
inline DfIndex build_df_index(const Corpus& corpus) {
  if (corpus.empty()) throw PreconditionError("cannot index an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const Example& example : corpus.examples) {
    std::vector<std::string> tokens = folded_tokens(example.text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (std::string& token : tokens) ++counts[std::move(token)];
  }
  DfIndex index;
  index.documents = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [token, count] : counts) {
    index.df.emplace(token, static_cast<double>(count) / n);
  }
  return index;
}

// ---------------------------------------------------------------------------
// Noun pairs and patterns.

inline constexpr double kDefaultNounThreshold = 0.05;

struct NounPair {
  std::string noun1;
  std::string noun2;
  Span span1;
  Span span2;
};

// Spans ordered and disjoint, each exactly delimiting its noun in `text`.
inline void validate_noun_pair(std::string_view text, const NounPair& nouns) {
  if (nouns.noun1.empty() || nouns.noun2.empty()) {
    throw InvariantError("noun pair contains an empty noun");
  }
  if (nouns.span1.begin > nouns.span1.end || nouns.span2.begin > nouns.span2.end ||
      nouns.span2.end > text.size()) {
    throw InvariantError("noun span outside the sentence");
  }
  if (nouns.span1.end > nouns.span2.begin) {
    throw InvariantError("noun spans overlap or are out of textual order");
  }
  if (text.substr(nouns.span1.begin, nouns.span1.length()) != nouns.noun1 ||
      text.substr(nouns.span2.begin, nouns.span2.length()) != nouns.noun2) {
    throw InvariantError("noun spans do not delimit their tokens");
  }
}

namespace detail {

inline NounPair lowest_two(const std::vector<Token>& tokens,
                           std::vector<std::pair<double, std::size_t>> ranked) {
  std::sort(ranked.begin(), ranked.end());
  std::size_t a = std::min(ranked[0].second, ranked[1].second);
  std::size_t b = std::max(ranked[0].second, ranked[1].second);
  return {tokens[a].text, tokens[b].text, tokens[a].span, tokens[b].span};
}

}  // namespace detail

// The two tokens with df below `threshold`, in textual order. With more than
// two candidates the two lowest frequencies win, earlier position first.
inline NounPair extract_nouns(const Example& example, const DfIndex& df_index,
                              double threshold = kDefaultNounThreshold) {
  std::vector<Token> tokens = tokenize(example.text);
  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double df = df_index.of(case_fold(tokens[i].text));
    if (df < threshold) candidates.emplace_back(df, i);
  }
  if (candidates.size() < 2) {
    throw ExtractionError("example '" + example.id + "': found " +
                              std::to_string(candidates.size()) +
                              " low-frequency tokens, need 2",
                          candidates.size());
  }
  return detail::lowest_two(tokens, std::move(candidates));
}

struct NounExtraction {
  NounPair nouns;
  bool fallback = false;
};

// Like extract_nouns, but falls back to the two lowest-df tokens overall and
// marks the result. Throws ExtractionError only for sentences with < 2 tokens.
inline NounExtraction extract_nouns_or_fallback(const Example& example,
                                                const DfIndex& df_index,
                                                double threshold = kDefaultNounThreshold) {
  try {
    return {extract_nouns(example, df_index, threshold), false};
  } catch (const ExtractionError&) {
    std::vector<Token> tokens = tokenize(example.text);
    if (tokens.size() < 2) {
      throw ExtractionError("example '" + example.id + "' has fewer than two tokens",
                            tokens.size());
    }
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      ranked.emplace_back(df_index.of(case_fold(tokens[i].text)), i);
    }
    return {detail::lowest_two(tokens, std::move(ranked)), true};
  }
}

// Reserved slot marker; contains no letters the tokenizer could produce
// from ordinary vocabulary.
inline constexpr std::string_view kPlaceholder = "\xE2\x9F\xA8" "B" "\xE2\x9F\xA9";

struct Pattern {
  std::string template_text;
  Language language = Language::kEn;

  friend auto operator<=>(const Pattern& a, const Pattern& b) {
    if (auto c = a.language <=> b.language; c != 0) return c;
    return a.template_text <=> b.template_text;
  }
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

inline std::size_t count_placeholders(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, pos + kPlaceholder.size())) {
    ++count;
  }
  return count;
}

inline Pattern derive_pattern(const Example& example, const NounPair& nouns) {
  validate_noun_pair(example.text, nouns);
  if (count_placeholders(example.text) != 0) {
    throw InvariantError("sentence '" + example.id + "' already contains the placeholder");
  }
  const std::string& text = example.text;
  std::string out;
  out.reserve(text.size());
  out.append(text, 0, nouns.span1.begin);
  out.append(kPlaceholder);
  out.append(text, nouns.span1.end, nouns.span2.begin - nouns.span1.end);
  out.append(kPlaceholder);
  out.append(text, nouns.span2.end, std::string::npos);
  return {std::move(out), example.language};
}

// Puts the two nouns back into the slots, first slot first.
inline std::string fill_pattern(const Pattern& pattern, std::string_view noun1,
                                std::string_view noun2) {
  const std::string& t = pattern.template_text;
  if (count_placeholders(t) != 2) {
    throw InvariantError("pattern must contain exactly two placeholders");
  }
  std::size_t first = t.find(kPlaceholder);
  std::size_t second = t.find(kPlaceholder, first + kPlaceholder.size());
  std::string out;
  out.append(t, 0, first);
  out.append(noun1);
  out.append(t, first + kPlaceholder.size(), second - first - kPlaceholder.size());
  out.append(noun2);
  out.append(t, second + kPlaceholder.size(), std::string::npos);
  return out;
}

// Per-example noun extraction and pattern; nouns/pattern are empty for
// sentences too short to carry two slots.
struct PatternAnnotation {
  std::optional<NounPair> nouns;
  std::optional<Pattern> pattern;
  bool fallback = false;
};

inline std::vector<PatternAnnotation> annotate_patterns(
    const Corpus& corpus, const DfIndex& df_index,
    double threshold = kDefaultNounThreshold) {
  std::vector<PatternAnnotation> out;
  out.reserve(corpus.size());
  for (const Example& example : corpus.examples) {
    PatternAnnotation annotation;
    try {
      NounExtraction extraction = extract_nouns_or_fallback(example, df_index, threshold);
      annotation.pattern = derive_pattern(example, extraction.nouns);
      annotation.nouns = std::move(extraction.nouns);
      annotation.fallback = extraction.fallback;
    } catch (const ExtractionError&) {
      warn("example '" + example.id + "' has no noun pair");
    } catch (const InvariantError& e) {
      warn(e.what());
    }
    out.push_back(std::move(annotation));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Development/validation split.

inline constexpr double kDefaultDevFraction = 0.3;

struct DevValSplit {
  Corpus dev;
  Corpus val;
  std::set<Pattern> held_out_patterns;
  // Positions of the dev examples in the source corpus, ascending.
  std::vector<std::size_t> dev_indices;
};

// All examples matching a complex pattern go to validation; the rest are
// sampled (seeded, stratified by label when labels exist) so the dev side
// holds round(dev_fraction * N) examples.
inline DevValSplit split_dev_validation(const Corpus& corpus,
                                        const std::vector<std::optional<Pattern>>& patterns,
                                        const std::set<Pattern>& complex_patterns,
                                        double dev_fraction, std::uint64_t seed) {
  if (patterns.size() != corpus.size()) {
    throw ShapeError("pattern annotations do not align with the corpus");
  }
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw ParameterError("dev_fraction must lie in (0,1)");
  }
  std::set<Pattern> present;
  for (const auto& p : patterns) {
    if (p) present.insert(*p);
  }
  for (const Pattern& p : complex_patterns) {
    if (!present.count(p)) {
      throw PreconditionError("complex pattern not present in corpus: " + p.template_text);
    }
  }

  const std::size_t n = corpus.size();
  std::vector<std::size_t> free_indices;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(patterns[i] && complex_patterns.count(*patterns[i]))) free_indices.push_back(i);
  }
  const auto target = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  if (target > free_indices.size()) {
    throw InfeasibleError("complex patterns hold " +
                          std::to_string(n - free_indices.size()) + " of " +
                          std::to_string(n) + " examples; cannot place " +
                          std::to_string(target) + " in the development set");
  }

  // Strata keyed by label; unlabeled examples form a single stratum.
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i : free_indices) {
    strata[corpus.examples[i].label.value_or(-1)].push_back(i);
  }
  // Largest-remainder allocation of `target` across strata.
  struct Quota {
    int key;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t allocated = 0;
  for (const auto& [key, members] : strata) {
    double exact = free_indices.empty()
                       ? 0.0
                       : static_cast<double>(target) * static_cast<double>(members.size()) /
                             static_cast<double>(free_indices.size());
    auto take = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({key, take, exact - static_cast<double>(take)});
    allocated += take;
  }
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; allocated < target && k < order.size(); ++k) {
    Quota& q = quotas[order[k]];
    if (q.take < strata[q.key].size()) {
      ++q.take;
      ++allocated;
    }
  }

  std::vector<char> in_dev(n, 0);
  for (const Quota& q : quotas) {
    const std::vector<std::size_t>& members = strata[q.key];
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(q.key + 2)}));
    for (std::size_t pick : sample_without_replacement(rng, members.size(), q.take)) {
      in_dev[members[pick]] = 1;
    }
  }

  DevValSplit split;
  split.dev.language = corpus.language;
  split.val.language = corpus.language;
  split.held_out_patterns = complex_patterns;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_dev[i]) {
      split.dev.examples.push_back(corpus.examples[i]);
      split.dev_indices.push_back(i);
    } else {
      split.val.examples.push_back(corpus.examples[i]);
    }
  }
  return split;
}

}  // namespace taxo

#endif  // TAXO_CORPUS_HPP_

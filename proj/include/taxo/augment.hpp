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

// Contextual insertion and substitution. A fill model proposes tokens for a
// masked slot; at most `max_edits` slots are edited per sentence, and
// substitution is only ever applied to acceptable (label 1) sentences.

#ifndef TAXO_AUGMENT_HPP_
#define TAXO_AUGMENT_HPP_

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

enum class AugmentOperation { kInsert, kSubstitute, kTranslate };

inline std::string_view to_string(AugmentOperation op) {
  switch (op) {
    case AugmentOperation::kInsert: return "insert";
    case AugmentOperation::kSubstitute: return "substitute";
    case AugmentOperation::kTranslate: return "translate";
  }
  return "insert";
}

inline AugmentOperation parse_augment_operation(std::string_view s) {
  if (s == "insert") return AugmentOperation::kInsert;
  if (s == "substitute") return AugmentOperation::kSubstitute;
  if (s == "translate") return AugmentOperation::kTranslate;
  throw ValueError("unknown augmentation operation '" + std::string(s) + "'");
}

inline constexpr std::string_view kSkippedFlag = "augmentation_skipped";
inline constexpr std::string_view kTranslationFailedFlag = "translation_failed";

struct AugmentedExample {
  std::string source_id;
  AugmentOperation operation = AugmentOperation::kInsert;
  int edits = 0;
  // Output sentence with label/score copied from the source.
  Example example;
  Language source_language = Language::kEn;
  bool skipped = false;
  bool failed = false;
};

struct AugmentedCorpus {
  Language language = Language::kEn;
  std::vector<AugmentedExample> items;

  std::size_t size() const { return items.size(); }

  // Failed translations carry no usable text and are left out.
  Corpus to_corpus() const {
    Corpus corpus;
    corpus.language = language;
    for (const AugmentedExample& item : items) {
      if (!item.failed) corpus.examples.push_back(item.example);
    }
    return corpus;
  }
};

// ---------------------------------------------------------------------------
// Fill models.

enum class FillMode { kInsert, kSubstitute };

struct FillCandidate {
  std::string token;
  double score = 0.0;
};

class ContextualFillModel {
 public:
  virtual ~ContextualFillModel() = default;

  // For kInsert, `position` is a gap index in [0, tokens.size()] (insert
  // before tokens[position]); for kSubstitute it indexes the masked token.
  // An empty result is an abstention.
  virtual std::vector<FillCandidate> candidates(const std::vector<std::string>& tokens,
                                                std::size_t position,
                                                FillMode mode) const = 0;
};

// Returns the same ranked list for every slot.
class FixedFillModel : public ContextualFillModel {
 public:
  explicit FixedFillModel(std::vector<std::string> ranked) : ranked_(std::move(ranked)) {}

  std::vector<FillCandidate> candidates(const std::vector<std::string>&, std::size_t,
                                        FillMode) const override {
    std::vector<FillCandidate> out;
    for (std::size_t i = 0; i < ranked_.size(); ++i) {
      out.push_back({ranked_[i], 1.0 / static_cast<double>(i + 1)});
    }
    return out;
  }

 private:
  std::vector<std::string> ranked_;
};

// Deterministic stand-in for a masked language model: ranks a fixed
// vocabulary by a hash of the slot's neighbouring tokens, so different
// contexts receive different (but reproducible) fillers.
class LexiconFillModel : public ContextualFillModel {
 public:
  LexiconFillModel(std::vector<std::string> insert_vocabulary,
                   std::vector<std::string> substitute_vocabulary, std::size_t top_k = 3)
      : insert_(std::move(insert_vocabulary)),
        substitute_(std::move(substitute_vocabulary)),
        top_k_(top_k) {}

  std::vector<FillCandidate> candidates(const std::vector<std::string>& tokens,
                                        std::size_t position,
                                        FillMode mode) const override {
    const std::vector<std::string>& vocab = mode == FillMode::kInsert ? insert_ : substitute_;
    if (vocab.empty()) return {};
    std::string left = position > 0 && position - 1 < tokens.size()
                           ? case_fold(tokens[position - 1])
                           : "<s>";
    std::size_t right_index = mode == FillMode::kInsert ? position : position + 1;
    std::string right = right_index < tokens.size() ? case_fold(tokens[right_index]) : "</s>";
    std::uint64_t context = fnv1a64(right, fnv1a64(left + "\x1f"));
    std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      ranked.emplace_back(splitmix64(context ^ fnv1a64(vocab[i])), i);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<FillCandidate> out;
    for (std::size_t r = 0; r < ranked.size() && r < top_k_; ++r) {
      out.push_back({vocab[ranked[r].second], 1.0 / static_cast<double>(r + 1)});
    }
    return out;
  }

 private:
  std::vector<std::string> insert_;
  std::vector<std::string> substitute_;
  std::size_t top_k_;
};

// ---------------------------------------------------------------------------
// Sentence-level operations.

inline constexpr int kDefaultMaxEdits = 2;

namespace detail {

inline std::vector<std::string> chunk_strings(std::string_view text) {
  std::vector<std::string> out;
  for (Token& chunk : whitespace_chunks(text)) out.push_back(std::move(chunk.text));
  return out;
}

inline bool starts_capitalized(std::string_view s) {
  if (s.empty()) return false;
  auto c = static_cast<unsigned char>(s[0]);
  if (c >= 'A' && c <= 'Z') return true;
  return c == 0xC3 && s.size() > 1 && static_cast<unsigned char>(s[1]) >= 0x80 &&
         static_cast<unsigned char>(s[1]) <= 0x9E;
}

// Highest-scoring candidate that is not punctuation-only and (when given)
// differs from `exclude` after case folding. Ties keep model order.
inline const FillCandidate* best_candidate(const std::vector<FillCandidate>& candidates,
                                           std::string_view exclude = {}) {
  const FillCandidate* best = nullptr;
  std::string excluded = case_fold(exclude);
  for (const FillCandidate& c : candidates) {
    if (trim(c.token).empty() || c.token.find_first_of(" \t\n") != std::string::npos) continue;
    if (punctuation_core(c.token).length() == 0) continue;
    if (!excluded.empty() && case_fold(c.token) == excluded) continue;
    if (best == nullptr || c.score > best->score) best = &c;
  }
  return best;
}

inline AugmentedExample make_output(const Example& source, AugmentOperation op,
                                    std::string_view suffix) {
  AugmentedExample out;
  out.source_id = source.id;
  out.operation = op;
  out.source_language = source.language;
  out.example = source;
  out.example.id = source.id + std::string(suffix);
  out.example.flags.clear();
  return out;
}

inline void finish(AugmentedExample& out, const std::vector<std::string>& tokens, int edits) {
  out.edits = edits;
  if (edits == 0) {
    out.skipped = true;
    out.example.flags.emplace_back(kSkippedFlag);
  } else {
    out.example.text = join(tokens, " ");
  }
}

}  // namespace detail

// Gaps (in [0, #chunks]) eligible for insertion. The gap before a
// capitalized first word is excluded; the final gap sits before any
// closing punctuation.
inline std::vector<std::size_t> insertion_gaps(std::string_view text) {
  std::vector<std::string> chunks = detail::chunk_strings(text);
  std::vector<std::size_t> gaps;
  for (std::size_t g = 0; g <= chunks.size(); ++g) {
    if (g == 0 && !chunks.empty() && detail::starts_capitalized(chunks[0])) continue;
    gaps.push_back(g);
  }
  return gaps;
}

// Inserts the fill model's top candidate at each gap (original-sentence
// coordinates). Gaps where the model abstains are skipped.
inline AugmentedExample contextual_insert_at(const Example& example,
                                             const ContextualFillModel& fill,
                                             std::vector<std::size_t> gaps) {
  std::vector<std::string> tokens = detail::chunk_strings(example.text);
  std::sort(gaps.begin(), gaps.end());
  gaps.erase(std::unique(gaps.begin(), gaps.end()), gaps.end());
  AugmentedExample out = detail::make_output(example, AugmentOperation::kInsert, ":ins");
  int edits = 0;
  // Right to left, so earlier gap indices stay valid after each insertion.
  for (auto it = gaps.rbegin(); it != gaps.rend(); ++it) {
    if (*it > tokens.size()) throw PreconditionError("insertion gap out of range");
    std::vector<FillCandidate> candidates = fill.candidates(tokens, *it, FillMode::kInsert);
    const FillCandidate* best = detail::best_candidate(candidates);
    if (best == nullptr) continue;
    if (*it == tokens.size() && !tokens.empty()) {
      // Sentence-final insertions go before the closing punctuation.
      std::string& last = tokens.back();
      const Span core = punctuation_core(last);
      std::string tail = core.length() > 0 ? last.substr(core.end) : std::string();
      if (!tail.empty()) last.erase(core.end);
      tokens.push_back(best->token + tail);
    } else {
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(*it), best->token);
    }
    ++edits;
  }
  detail::finish(out, tokens, edits);
  return out;
}

// k ~ Uniform{1..max_edits} distinct gaps, each filled with the model's top
// candidate. Applies to both labels.
inline AugmentedExample contextual_insert(const Example& example,
                                          const ContextualFillModel& fill,
                                          int max_edits, std::uint64_t seed) {
  if (tokenize(example.text).empty()) {
    throw PreconditionError("example '" + example.id + "' has no tokens");
  }
  if (max_edits < 1) throw ParameterError("max_edits must be at least 1");
  Rng rng(derive_seed(seed, {0x1a5e27ULL}));
  const std::vector<std::size_t> eligible = insertion_gaps(example.text);
  const auto k = static_cast<std::size_t>(1 + uniform_below(rng, static_cast<std::uint64_t>(max_edits)));
  std::vector<std::size_t> gaps;
  for (std::size_t pick : sample_without_replacement(rng, eligible.size(), k)) {
    gaps.push_back(eligible[pick]);
  }
  return contextual_insert_at(example, fill, std::move(gaps));
}

// Replaces the word at each position with the best candidate that differs
// from it; punctuation attached to the word is kept. Positions with no such
// candidate are skipped.
inline AugmentedExample contextual_substitute_at(const Example& example,
                                                 const ContextualFillModel& fill,
                                                 const std::vector<std::size_t>& positions) {
  if (example.label != 1) {
    throw ContractError("substitution requires a label-1 example (got '" + example.id + "')");
  }
  std::vector<std::string> tokens = detail::chunk_strings(example.text);
  AugmentedExample out = detail::make_output(example, AugmentOperation::kSubstitute, ":sub");
  int edits = 0;
  std::vector<char> used(tokens.size(), 0);
  for (std::size_t position : positions) {
    if (position >= tokens.size()) throw PreconditionError("substitution position out of range");
    if (used[position]) continue;
    Span core = punctuation_core(tokens[position]);
    if (core.length() == 0) continue;
    std::string original = tokens[position].substr(core.begin, core.length());
    std::vector<FillCandidate> candidates =
        fill.candidates(tokens, position, FillMode::kSubstitute);
    const FillCandidate* best = detail::best_candidate(candidates, original);
    if (best == nullptr) continue;
    tokens[position] = tokens[position].substr(0, core.begin) + best->token +
                       tokens[position].substr(core.end);
    used[position] = 1;
    ++edits;
  }
  detail::finish(out, tokens, edits);
  return out;
}

inline AugmentedExample contextual_substitute(const Example& example,
                                              const ContextualFillModel& fill,
                                              int max_edits, std::uint64_t seed) {
  if (example.label != 1) {
    throw ContractError("substitution requires a label-1 example (got '" + example.id + "')");
  }
  if (max_edits < 1) throw ParameterError("max_edits must be at least 1");
  std::vector<std::string> chunks = detail::chunk_strings(example.text);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (punctuation_core(chunks[i]).length() > 0) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw PreconditionError("example '" + example.id + "' has no tokens");
  }
  Rng rng(derive_seed(seed, {0x5ab57ULL}));
  const auto k = static_cast<std::size_t>(1 + uniform_below(rng, static_cast<std::uint64_t>(max_edits)));
  std::vector<std::size_t> positions;
  for (std::size_t pick : sample_without_replacement(rng, eligible.size(), k)) {
    positions.push_back(eligible[pick]);
  }
  return contextual_substitute_at(example, fill, positions);
}

// ---------------------------------------------------------------------------
// Corpus-level driver.

struct AugmentOptions {
  int max_edits = kDefaultMaxEdits;
  int inserts_per_example = 1;
  int substitutes_per_positive = 1;
};

// One insertion variant per example and one substitution variant per
// label-1 example (counts configurable). Skips are kept as flagged
// pass-through rows; the batch never aborts on them.
inline AugmentedCorpus augment_binary_corpus(const Corpus& corpus,
                                             const ContextualFillModel& fill,
                                             std::uint64_t seed,
                                             const AugmentOptions& options = {}) {
  AugmentedCorpus out;
  out.language = corpus.language;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Example& example = corpus.examples[i];
    if (!example.label) {
      throw PreconditionError("augmentation needs a binary-labelled corpus (example '" +
                              example.id + "' has no label)");
    }
    for (int v = 0; v < options.inserts_per_example; ++v) {
      AugmentedExample item = contextual_insert(
          example, fill, options.max_edits, derive_seed(seed, {i, static_cast<std::uint64_t>(v), 1}));
      if (options.inserts_per_example > 1) item.example.id += std::to_string(v + 1);
      out.items.push_back(std::move(item));
    }
    if (*example.label != 1) continue;
    for (int v = 0; v < options.substitutes_per_positive; ++v) {
      AugmentedExample item = contextual_substitute(
          example, fill, options.max_edits, derive_seed(seed, {i, static_cast<std::uint64_t>(v), 2}));
      if (options.substitutes_per_positive > 1) item.example.id += std::to_string(v + 1);
      out.items.push_back(std::move(item));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Provenance files: task columns plus source_id, operation, edits,
// source_language and flags.

inline void write_augmented_file(std::ostream& out, const AugmentedCorpus& corpus,
                                 TaskMode mode, std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "ID\tSentence\t" << (mode == TaskMode::kBinary ? "Labels" : "Score")
      << "\tsource_id\toperation\tedits\tsource_language\tflags\n";
  for (const AugmentedExample& item : corpus.items) {
    const Example& e = item.example;
    out << tsv_escape(e.id) << '\t' << tsv_escape(e.text) << '\t';
    if (mode == TaskMode::kBinary) {
      out << e.label.value_or(0);
    } else {
      out << format_exact(e.score.value_or(kMinScore));
    }
    out << '\t' << tsv_escape(item.source_id) << '\t' << to_string(item.operation) << '\t'
        << item.edits << '\t' << to_string(item.source_language) << '\t'
        << tsv_escape(join(e.flags, ",")) << '\n';
  }
}

}  // namespace taxo

#endif  // TAXO_AUGMENT_HPP_

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

#ifndef TAXO_TFIDF_HPP_
#define TAXO_TFIDF_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"

namespace taxo {

// Sorted (column, value) pairs.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

inline double dot(const SparseVector& x, const std::vector<double>& w) {
  double sum = 0.0;
  for (const auto& [col, value] : x) sum += value * w[col];
  return sum;
}

inline double squared_norm(const SparseVector& x) {
  double sum = 0.0;
  for (const auto& [col, value] : x) sum += value * value;
  return sum;
}

enum class NgramAnalyzer { kWord, kChar };

inline std::string_view to_string(NgramAnalyzer analyzer) {
  return analyzer == NgramAnalyzer::kWord ? "word" : "char";
}

inline NgramAnalyzer parse_ngram_analyzer(std::string_view s) {
  if (s == "word") return NgramAnalyzer::kWord;
  if (s == "char") return NgramAnalyzer::kChar;
  throw ConfigError("unknown n-gram analyzer '" + std::string(s) + "' (expected word or char)");
}

// All n-grams with 1 <= n <= ngram_max. Word grams use the corpus tokenizer
// (case-folded); char grams run over UTF-8 code points of the case-folded,
// whitespace-collapsed sentence.
inline std::vector<std::string> extract_ngrams(std::string_view text, int ngram_max,
                                               NgramAnalyzer analyzer) {
  std::vector<std::string> units;
  if (analyzer == NgramAnalyzer::kWord) {
    units = folded_tokens(text);
  } else {
    std::string folded = case_fold(collapse_whitespace(text));
    for (std::size_t i = 0; i < folded.size();) {
      std::size_t width = 1;
      auto c = static_cast<unsigned char>(folded[i]);
      if (c >= 0xF0) width = 4;
      else if (c >= 0xE0) width = 3;
      else if (c >= 0xC0) width = 2;
      units.push_back(folded.substr(i, width));
      i += width;
    }
  }
  const std::string_view glue = analyzer == NgramAnalyzer::kWord ? " " : "";
  std::vector<std::string> grams;
  for (int n = 1; n <= ngram_max; ++n) {
    for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= units.size(); ++start) {
      std::string gram = units[start];
      for (int k = 1; k < n; ++k) {
        gram.append(glue);
        gram.append(units[start + static_cast<std::size_t>(k)]);
      }
      grams.push_back(std::move(gram));
    }
  }
  return grams;
}

// Smoothed TF-IDF: idf(t) = ln((1 + N) / (1 + df(t))) + 1, raw term counts,
// L2-normalized rows. Columns follow the lexicographic order of n-grams.
class TfidfVectorizer {
 public:
  static constexpr int kDefaultNgramMax = 3;

  static TfidfVectorizer fit(const std::vector<std::string>& documents,
                             int ngram_max = kDefaultNgramMax,
                             NgramAnalyzer analyzer = NgramAnalyzer::kWord) {
    if (documents.empty()) throw PreconditionError("cannot fit TF-IDF on an empty corpus");
    if (ngram_max < 1) throw ParameterError("ngram_max must be at least 1");
    std::map<std::string, std::size_t> doc_counts;
    for (const std::string& doc : documents) {
      std::vector<std::string> grams = extract_ngrams(doc, ngram_max, analyzer);
      std::set<std::string> unique(grams.begin(), grams.end());
      for (const std::string& g : unique) ++doc_counts[g];
    }
    TfidfVectorizer v;
    v.ngram_max_ = ngram_max;
    v.analyzer_ = analyzer;
    const double n = static_cast<double>(documents.size());
    std::uint32_t col = 0;
    for (const auto& [gram, count] : doc_counts) {
      v.vocabulary_.emplace(gram, col++);
      v.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return v;
  }

  SparseVector transform(std::string_view text) const {
    std::map<std::uint32_t, double> counts;
    for (const std::string& gram : extract_ngrams(text, ngram_max_, analyzer_)) {
      auto it = vocabulary_.find(gram);
      if (it != vocabulary_.end()) counts[it->second] += 1.0;
    }
    SparseVector row;
    row.reserve(counts.size());
    double norm = 0.0;
    for (const auto& [col, tf] : counts) {
      double value = tf * idf_[col];
      row.emplace_back(col, value);
      norm += value * value;
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (auto& entry : row) entry.second /= norm;
    }
    return row;
  }

  std::vector<SparseVector> transform(const std::vector<std::string>& documents) const {
    std::vector<SparseVector> rows;
    rows.reserve(documents.size());
    for (const std::string& d : documents) rows.push_back(transform(d));
    return rows;
  }

  const std::map<std::string, std::uint32_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t dimension() const { return idf_.size(); }
  int ngram_max() const { return ngram_max_; }
  NgramAnalyzer analyzer() const { return analyzer_; }

  double idf(const std::string& gram) const {
    auto it = vocabulary_.find(gram);
    if (it == vocabulary_.end()) throw ValueError("n-gram not in vocabulary: " + gram);
    return idf_[it->second];
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["ngram_max"] = ngram_max_;
    j["analyzer"] = to_string(analyzer_);
    nlohmann::json vocab = nlohmann::json::array();
    for (const auto& [gram, col] : vocabulary_) vocab.push_back({gram, idf_[col]});
    j["vocabulary"] = std::move(vocab);
    return j;
  }

  static TfidfVectorizer from_json(const nlohmann::json& j) {
    TfidfVectorizer v;
    v.ngram_max_ = j.at("ngram_max").get<int>();
    v.analyzer_ = parse_ngram_analyzer(j.at("analyzer").get<std::string>());
    std::uint32_t col = 0;
    for (const auto& entry : j.at("vocabulary")) {
      v.vocabulary_.emplace(entry.at(0).get<std::string>(), col++);
      v.idf_.push_back(entry.at(1).get<double>());
    }
    return v;
  }

 private:
  std::map<std::string, std::uint32_t> vocabulary_;
  std::vector<double> idf_;
  int ngram_max_ = kDefaultNgramMax;
  NgramAnalyzer analyzer_ = NgramAnalyzer::kWord;
};

inline TfidfVectorizer fit_tfidf(const Corpus& corpus,
                                 int ngram_max = TfidfVectorizer::kDefaultNgramMax,
                                 NgramAnalyzer analyzer = NgramAnalyzer::kWord) {
  if (corpus.empty()) throw PreconditionError("cannot fit TF-IDF on an empty corpus");
  std::vector<std::string> docs;
  docs.reserve(corpus.size());
  for (const Example& e : corpus.examples) docs.push_back(e.text);
  return TfidfVectorizer::fit(docs, ngram_max, analyzer);
}

}  // namespace taxo

#endif  // TAXO_TFIDF_HPP_

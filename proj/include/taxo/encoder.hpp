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

#ifndef TAXO_ENCODER_HPP_
#define TAXO_ENCODER_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "taxo/common.hpp"
#include "taxo/corpus.hpp"
#include "taxo/regressors.hpp"
#include "taxo/tfidf.hpp"

namespace taxo {

// text -> fixed-dimension real vector; same text, same vector.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> encode(const std::string& text) const = 0;
};

// Signed feature hashing of word n-grams, L2-normalized.
class HashedNgramEncoder : public SentenceEncoder {
 public:
  explicit HashedNgramEncoder(std::size_t dimension = 64, int ngram_max = 2)
      : dimension_(dimension), ngram_max_(ngram_max) {
    if (dimension_ == 0) throw ParameterError("encoder dimension must be positive");
  }

  std::size_t dimension() const override { return dimension_; }

  std::vector<double> encode(const std::string& text) const override {
    std::vector<double> v(dimension_, 0.0);
    for (const std::string& gram : extract_ngrams(text, ngram_max_, NgramAnalyzer::kWord)) {
      const std::uint64_t h = splitmix64(fnv1a64(gram));
      v[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return v;
  }

 private:
  std::size_t dimension_;
  int ngram_max_;
};

// Embeddings computed offline by an external model (e.g. a multilingual
// sentence encoder), one "sentence<TAB>v1 v2 ... vd" record per line.
class PrecomputedEncoder : public SentenceEncoder {
 public:
  // Accepts "file:<path>" or a bare path.
  static PrecomputedEncoder load(const std::string& uri) {
    std::string path = uri.rfind("file:", 0) == 0 ? uri.substr(5) : uri;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProviderError("cannot open embedding file " + path);
    PrecomputedEncoder enc;
    std::string line;
    std::size_t row = 0;
    while (read_line(in, line)) {
      ++row;
      if (line.empty()) continue;
      auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw ProviderError(path + ": row " + std::to_string(row) + ": missing vector");
      }
      std::vector<double> v;
      const char* p = line.c_str() + tab + 1;
      char* end = nullptr;
      for (double x = std::strtod(p, &end); end != p; x = std::strtod(p, &end)) {
        v.push_back(x);
        p = end;
      }
      if (enc.dimension_ == 0) enc.dimension_ = v.size();
      if (v.empty() || v.size() != enc.dimension_) {
        throw ProviderError(path + ": row " + std::to_string(row) + ": inconsistent dimension");
      }
      enc.vectors_[tsv_unescape(line.substr(0, tab))] = std::move(v);
    }
    if (enc.dimension_ == 0) throw ProviderError(path + ": no embeddings");
    return enc;
  }

  std::size_t dimension() const override { return dimension_; }

  std::vector<double> encode(const std::string& text) const override {
    auto it = vectors_.find(text);
    if (it == vectors_.end()) throw ProviderError("no precomputed embedding for: " + text);
    return it->second;
  }

 private:
  std::size_t dimension_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
};

inline Matrix encode_corpus(const SentenceEncoder& encoder, const Corpus& corpus) {
  Matrix m(static_cast<Eigen::Index>(corpus.size()),
           static_cast<Eigen::Index>(encoder.dimension()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<double> v = encoder.encode(corpus.examples[i].text);
    if (v.size() != encoder.dimension()) throw ShapeError("encoder returned a wrong dimension");
    for (std::size_t c = 0; c < v.size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[c];
    }
  }
  return m;
}

inline Vector corpus_scores(const Corpus& corpus) {
  Vector y(static_cast<Eigen::Index>(corpus.size()));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Example& e = corpus.examples[i];
    if (!e.score) throw PreconditionError("example '" + e.id + "' has no score");
    y(static_cast<Eigen::Index>(i)) = *e.score;
  }
  return y;
}

// "hashed", "hashed:<dim>" or "file:<path>".
inline std::unique_ptr<SentenceEncoder> make_encoder(const std::string& descriptor) {
  if (descriptor == "hashed") return std::make_unique<HashedNgramEncoder>();
  if (descriptor.rfind("hashed:", 0) == 0) {
    return std::make_unique<HashedNgramEncoder>(std::stoul(descriptor.substr(7)));
  }
  if (descriptor.rfind("file:", 0) == 0) {
    return std::make_unique<PrecomputedEncoder>(PrecomputedEncoder::load(descriptor));
  }
  throw ConfigError("unknown encoder '" + descriptor + "' (expected hashed, hashed:<dim> or file:<path>)");
}

}  // namespace taxo

#endif  // TAXO_ENCODER_HPP_

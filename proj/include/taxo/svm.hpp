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

// Linear max-margin classifier (hinge loss) trained by dual coordinate
// descent, and the TF-IDF + SVM sentence baseline built on it.

#ifndef TAXO_SVM_HPP_
#define TAXO_SVM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"
#include "taxo/tfidf.hpp"

namespace taxo {

struct LinearSvmOptions {
  double C = 1.0;
  int max_iterations = 1000;
  // Stop when the spread of projected gradients falls below this.
  double tolerance = 1e-4;
  std::uint64_t seed = 1;
};

class LinearSvm {
 public:
  LinearSvm() = default;
  LinearSvm(std::vector<double> weights, double bias, int iterations = 0)
      : weights_(std::move(weights)), bias_(bias), iterations_(iterations) {}

  double decision(const SparseVector& x) const {
    double sum = bias_;
    for (const auto& [col, value] : x) {
      if (col < weights_.size()) sum += value * weights_[col];
    }
    return sum;
  }

  int predict(const SparseVector& x) const { return decision(x) >= 0.0 ? 1 : 0; }

  std::vector<int> predict(const std::vector<SparseVector>& rows) const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const SparseVector& r : rows) out.push_back(predict(r));
    return out;
  }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  int iterations() const { return iterations_; }

  nlohmann::json to_json() const {
    nlohmann::json sparse = nlohmann::json::array();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] != 0.0) sparse.push_back({i, weights_[i]});
    }
    return {{"dimension", weights_.size()}, {"bias", bias_}, {"weights", sparse}};
  }

  static LinearSvm from_json(const nlohmann::json& j) {
    std::vector<double> w(j.at("dimension").get<std::size_t>(), 0.0);
    for (const auto& entry : j.at("weights")) {
      w.at(entry.at(0).get<std::size_t>()) = entry.at(1).get<double>();
    }
    return LinearSvm(std::move(w), j.at("bias").get<double>());
  }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  int iterations_ = 0;
};

// Minimises 0.5 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i + b)), with the bias
// treated as a weight on a constant feature of 1.
inline LinearSvm train_svm_classifier(const std::vector<SparseVector>& features,
                                      const std::vector<int>& labels, std::size_t dimension,
                                      const LinearSvmOptions& options = {}) {
  if (features.size() != labels.size()) {
    throw ShapeError("feature rows and labels differ in length");
  }
  std::size_t positives = 0;
  for (int label : labels) {
    if (label != 0 && label != 1) throw ValueError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DegenerateDataError("training data must contain both classes");
  }
  for (const SparseVector& row : features) {
    for (const auto& entry : row) {
      if (entry.first >= dimension) throw ShapeError("feature column exceeds dimension");
    }
  }

  const std::size_t n = features.size();
  std::vector<double> w(dimension, 0.0);
  double b = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> y(n);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1.0 : -1.0;
    qd[i] = squared_norm(features[i]) + 1.0;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(options.seed, {0x5f3ULL}));

  int iteration = 0;
  for (; iteration < options.max_iterations; ++iteration) {
    seeded_shuffle(order, rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const double g = y[i] * (dot(features[i], w) + b) - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] >= options.C) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::fabs(pg) <= 1e-12) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(alpha[i] - g / qd[i], 0.0, options.C);
      const double delta = (alpha[i] - old) * y[i];
      for (const auto& [col, value] : features[i]) w[col] += delta * value;
      b += delta;
    }
    if (pg_max - pg_min < options.tolerance) {
      ++iteration;
      break;
    }
  }
  return LinearSvm(std::move(w), b, iteration);
}

inline LinearSvm train_svm_classifier(const std::vector<std::vector<double>>& dense,
                                      const std::vector<int>& labels,
                                      const LinearSvmOptions& options = {}) {
  std::size_t dimension = dense.empty() ? 0 : dense.front().size();
  std::vector<SparseVector> rows;
  rows.reserve(dense.size());
  for (const auto& d : dense) {
    if (d.size() != dimension) throw ShapeError("ragged feature matrix");
    SparseVector row;
    for (std::size_t c = 0; c < d.size(); ++c) {
      if (d[c] != 0.0) row.emplace_back(static_cast<std::uint32_t>(c), d[c]);
    }
    rows.push_back(std::move(row));
  }
  return train_svm_classifier(rows, labels, dimension, options);
}

inline SparseVector to_sparse(const std::vector<double>& dense) {
  SparseVector row;
  for (std::size_t c = 0; c < dense.size(); ++c) {
    if (dense[c] != 0.0) row.emplace_back(static_cast<std::uint32_t>(c), dense[c]);
  }
  return row;
}

// TF-IDF n-gram features into a linear SVM.
class TfidfSvmClassifier {
 public:
  struct Options {
    int ngram_max = TfidfVectorizer::kDefaultNgramMax;
    NgramAnalyzer analyzer = NgramAnalyzer::kWord;
    LinearSvmOptions svm;
  };

  static TfidfSvmClassifier fit(const Corpus& corpus, const Options& options) {
    std::vector<int> labels;
    labels.reserve(corpus.size());
    for (const Example& e : corpus.examples) {
      if (!e.label) throw PreconditionError("example '" + e.id + "' has no label");
      labels.push_back(*e.label);
    }
    TfidfSvmClassifier c;
    c.vectorizer_ = fit_tfidf(corpus, options.ngram_max, options.analyzer);
    std::vector<SparseVector> rows;
    rows.reserve(corpus.size());
    for (const Example& e : corpus.examples) rows.push_back(c.vectorizer_.transform(e.text));
    c.svm_ = train_svm_classifier(rows, labels, c.vectorizer_.dimension(), options.svm);
    return c;
  }

  static TfidfSvmClassifier fit(const Corpus& corpus) { return fit(corpus, Options{}); }

  int predict(std::string_view text) const { return svm_.predict(vectorizer_.transform(text)); }

  std::vector<int> predict(const std::vector<std::string>& texts) const {
    std::vector<int> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(predict(t));
    return out;
  }

  const TfidfVectorizer& vectorizer() const { return vectorizer_; }
  const LinearSvm& svm() const { return svm_; }

  nlohmann::json to_json() const {
    return {{"format", "taxo-tfidf-svm"}, {"version", 1},
            {"tfidf", vectorizer_.to_json()}, {"svm", svm_.to_json()}};
  }

  static TfidfSvmClassifier from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "taxo-tfidf-svm" || j.value("version", 0) != 1) {
      throw ValueError("not a version-1 TF-IDF/SVM artifact");
    }
    TfidfSvmClassifier c;
    c.vectorizer_ = TfidfVectorizer::from_json(j.at("tfidf"));
    c.svm_ = LinearSvm::from_json(j.at("svm"));
    return c;
  }

 private:
  TfidfVectorizer vectorizer_;
  LinearSvm svm_;
};

}  // namespace taxo

#endif  // TAXO_SVM_HPP_

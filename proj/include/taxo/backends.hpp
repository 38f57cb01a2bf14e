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

// Classifier backends: a hashed-feature logistic model trained with AdamW
// (the reference), the TF-IDF/SVM baseline, and an adapter that delegates
// to an external program.

#ifndef TAXO_BACKENDS_HPP_
#define TAXO_BACKENDS_HPP_

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "taxo/common.hpp"
#include "taxo/corpus.hpp"
#include "taxo/pipeline.hpp"
#include "taxo/svm.hpp"

namespace taxo {

namespace detail {

inline double option_double(const BackendOptions& options, const std::string& key,
                            double fallback) {
  auto it = options.find(key);
  if (it == options.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("backend option '" + key + "' is not a number: " + it->second);
  }
}

inline std::vector<int> stage_labels(const std::vector<Example>& data) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (const Example& e : data) {
    if (!e.label) throw PreconditionError("example '" + e.id + "' has no binary label");
    labels.push_back(*e.label);
  }
  return labels;
}

}  // namespace detail

// Logistic regression over signed-hashed unigram and bigram features,
// trained by mini-batch AdamW. Stage learning rates are given in
// transformer units (1e-5 scale) and multiplied by `lr_scale`.
class HashedLinearBackend : public ClassifierBackend {
 public:
  struct Options {
    std::size_t buckets = std::size_t{1} << 16;
    double lr_scale = 1000.0;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  HashedLinearBackend() : HashedLinearBackend(Options{}) {}
  explicit HashedLinearBackend(Options options)
      : options_(options), weights_(options.buckets, 0.0) {
    if (options_.buckets == 0) throw ConfigError("hashed backend needs at least one bucket");
  }

  static std::unique_ptr<ClassifierBackend> create(const BackendOptions& opts) {
    Options o;
    o.buckets = static_cast<std::size_t>(
        detail::option_double(opts, "buckets", static_cast<double>(o.buckets)));
    o.lr_scale = detail::option_double(opts, "lr_scale", o.lr_scale);
    o.weight_decay = detail::option_double(opts, "weight_decay", o.weight_decay);
    return std::make_unique<HashedLinearBackend>(o);
  }

  std::string name() const override { return "hashed_linear"; }

  SparseVector features(std::string_view text) const {
    std::vector<std::string> tokens = folded_tokens(text);
    std::map<std::uint32_t, double> acc;
    auto add = [&](std::string_view gram) {
      std::uint64_t h = splitmix64(fnv1a64(gram));
      acc[static_cast<std::uint32_t>(h % options_.buckets)] += (h >> 63) ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      add(tokens[i]);
      if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
    }
    SparseVector x;
    double norm = 0.0;
    for (const auto& [col, v] : acc) {
      if (v != 0.0) {
        x.emplace_back(col, v);
        norm += v * v;
      }
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (auto& entry : x) entry.second /= norm;
    }
    return x;
  }

  void fine_tune(const std::vector<Example>& data, const StageConfig& stage,
                 std::uint64_t seed) override {
    if (stage.optimizer != "adamw") {
      throw ConfigError("hashed_linear supports only the adamw optimizer, got " + stage.optimizer);
    }
    if (stage.lr_schedule != "linear" && stage.lr_schedule != "constant") {
      throw ConfigError("unknown learning-rate schedule " + stage.lr_schedule);
    }
    if (stage.epochs <= 0 || data.empty()) return;
    if (stage.batch_size < 1) throw ConfigError("batch size must be at least 1");
    std::vector<int> labels = detail::stage_labels(data);
    std::vector<SparseVector> rows;
    rows.reserve(data.size());
    for (const Example& e : data) rows.push_back(features(e.text));

    // Optimizer state starts fresh each stage, as a new fine-tuning run would.
    std::vector<double> m(weights_.size() + 1, 0.0);
    std::vector<double> v(weights_.size() + 1, 0.0);
    const std::size_t batch = static_cast<std::size_t>(stage.batch_size);
    const std::size_t steps_per_epoch = (rows.size() + batch - 1) / batch;
    const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(stage.epochs);
    const double base_lr = stage.learning_rate * options_.lr_scale;
    std::vector<std::size_t> order(rows.size());
    Rng rng(derive_seed(seed, {0xada3ULL}));
    std::size_t step = 0;
    std::map<std::uint32_t, double> grad;
    for (int epoch = 0; epoch < stage.epochs; ++epoch) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      seeded_shuffle(order, rng);
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t end = std::min(order.size(), start + batch);
        grad.clear();
        double grad_bias = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          const double p = 1.0 / (1.0 + std::exp(-logit(rows[i])));
          const double g = (p - labels[i]) / static_cast<double>(end - start);
          for (const auto& [col, x] : rows[i]) grad[col] += g * x;
          grad_bias += g;
        }
        ++step;
        const double lr = stage.lr_schedule == "linear"
                              ? base_lr * static_cast<double>(total_steps - step + 1) /
                                    static_cast<double>(total_steps)
                              : base_lr;
        const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step));
        auto update = [&](double& w, std::size_t slot, double g, bool decay) {
          m[slot] = options_.beta1 * m[slot] + (1.0 - options_.beta1) * g;
          v[slot] = options_.beta2 * v[slot] + (1.0 - options_.beta2) * g * g;
          if (decay) w -= lr * options_.weight_decay * w;
          w -= lr * (m[slot] / c1) / (std::sqrt(v[slot] / c2) + options_.epsilon);
        };
        // Lazy sparse update: only coordinates touched by this batch move.
        for (const auto& [col, g] : grad) update(weights_[col], col, g, true);
        update(bias_, weights_.size(), grad_bias, false);
      }
    }
    trained_ = true;
    ++stages_;
  }

  std::vector<int> predict(const std::vector<std::string>& texts) const override {
    if (!trained_) throw StateError("hashed_linear backend is not trained");
    std::vector<int> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(logit(features(t)) >= 0.0 ? 1 : 0);
    return out;
  }

  std::string fingerprint() const override {
    std::uint64_t h = fnv1a64(name());
    auto mix = [&h](double d) {
      char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof d);
      h = fnv1a64(std::string_view(bytes, sizeof bytes), h);
    };
    for (double w : weights_) mix(w);
    mix(bias_);
    return hex64(h);
  }

  bool trained() const override { return trained_; }

  void save(std::ostream& out) const override {
    out << "taxo-hashed-linear 1\n";
    out << "buckets " << weights_.size() << "\n";
    out << "trained " << (trained_ ? 1 : 0) << "\n";
    out << "stages " << stages_ << "\n";
    out << "bias " << format_exact(bias_) << "\n";
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] != 0.0) out << i << " " << format_exact(weights_[i]) << "\n";
    }
  }

  void load(std::istream& in) override {
    std::string magic;
    int version = 0;
    std::string key;
    std::size_t buckets = 0;
    int trained = 0;
    if (!(in >> magic >> version) || magic != "taxo-hashed-linear" || version != 1) {
      throw ValueError("not a version-1 hashed_linear model");
    }
    if (!(in >> key >> buckets) || key != "buckets" || buckets == 0) {
      throw ValueError("hashed_linear model: bad bucket count");
    }
    if (!(in >> key >> trained) || key != "trained") throw ValueError("hashed_linear model: bad header");
    if (!(in >> key >> stages_) || key != "stages") throw ValueError("hashed_linear model: bad header");
    if (!(in >> key >> bias_) || key != "bias") throw ValueError("hashed_linear model: bad bias");
    options_.buckets = buckets;
    weights_.assign(buckets, 0.0);
    std::size_t index = 0;
    double value = 0.0;
    while (in >> index >> value) {
      if (index >= buckets) throw ValueError("hashed_linear model: weight index out of range");
      weights_[index] = value;
    }
    trained_ = trained != 0;
  }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  double logit(const SparseVector& x) const { return dot(x, weights_) + bias_; }

  Options options_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  bool trained_ = false;
  int stages_ = 0;
};

// TF-IDF + linear SVM as a staged backend. Each stage refits on everything
// seen so far; stage hyper-parameters other than epochs do not apply.
class TfidfSvmBackend : public ClassifierBackend {
 public:
  explicit TfidfSvmBackend(TfidfSvmClassifier::Options options = {}) : options_(options) {}

  static std::unique_ptr<ClassifierBackend> create(const BackendOptions& opts) {
    TfidfSvmClassifier::Options o;
    o.ngram_max = static_cast<int>(detail::option_double(opts, "ngram_max", o.ngram_max));
    if (auto it = opts.find("analyzer"); it != opts.end()) {
      o.analyzer = parse_ngram_analyzer(it->second);
    }
    o.svm.C = detail::option_double(opts, "C", o.svm.C);
    return std::make_unique<TfidfSvmBackend>(o);
  }

  std::string name() const override { return "tfidf_svm"; }

  void fine_tune(const std::vector<Example>& data, const StageConfig& stage,
                 std::uint64_t seed) override {
    if (stage.epochs <= 0 || data.empty()) return;
    detail::stage_labels(data);
    seen_.examples.insert(seen_.examples.end(), data.begin(), data.end());
    TfidfSvmClassifier::Options o = options_;
    o.svm.seed = seed;
    model_ = TfidfSvmClassifier::fit(seen_, o);
  }

  std::vector<int> predict(const std::vector<std::string>& texts) const override {
    if (!model_) throw StateError("tfidf_svm backend is not trained");
    return model_->predict(texts);
  }

  std::string fingerprint() const override {
    if (!model_) return hex64(fnv1a64(name()));
    return hex64(fnv1a64(model_->to_json().dump()));
  }

  bool trained() const override { return model_.has_value(); }

  void save(std::ostream& out) const override {
    if (!model_) throw StateError("tfidf_svm backend is not trained");
    out << model_->to_json().dump() << "\n";
  }

  void load(std::istream& in) override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValueError(std::string("tfidf_svm model: ") + e.what());
    }
    model_ = TfidfSvmClassifier::from_json(j);
  }

  const TfidfSvmClassifier* model() const { return model_ ? &*model_ : nullptr; }

 private:
  TfidfSvmClassifier::Options options_;
  Corpus seen_;
  std::optional<TfidfSvmClassifier> model_;
};

// Delegates to an external program, e.g. a transformer fine-tuning script:
//   <command> train --state DIR --data FILE --lr X --epochs N --batch B
//                   --optimizer O --schedule S --seed K
//   <command> predict --state DIR --input FILE --output FILE
// Data files are ID/Sentence/Labels TSV; predict writes one label per line.
// The program keeps its model under DIR; `head` is forwarded when set.
class ExternalCommandBackend : public ClassifierBackend {
 public:
  ExternalCommandBackend(std::string command, std::filesystem::path state_dir,
                         std::string head = {})
      : command_(std::move(command)), state_dir_(std::move(state_dir)), head_(std::move(head)) {
    if (command_.empty()) throw ConfigError("external backend needs a 'command' option");
  }

  static std::unique_ptr<ClassifierBackend> create(const BackendOptions& opts) {
    auto get = [&](const std::string& key) {
      auto it = opts.find(key);
      return it == opts.end() ? std::string() : it->second;
    };
    std::string state = get("state_dir");
    if (state.empty()) state = (std::filesystem::temp_directory_path() / "taxo-external").string();
    return std::make_unique<ExternalCommandBackend>(get("command"), state, get("head"));
  }

  std::string name() const override { return "external"; }

  void fine_tune(const std::vector<Example>& data, const StageConfig& stage,
                 std::uint64_t seed) override {
    if (stage.epochs <= 0 || data.empty()) return;
    std::filesystem::create_directories(state_dir_);
    const std::filesystem::path file = state_dir_ / ("stage_" + std::to_string(stages_) + ".tsv");
    {
      std::ofstream out(file, std::ios::binary);
      Corpus c;
      c.examples = data;
      write_task_file(out, c, TaskMode::kBinary);
    }
    std::ostringstream cmd;
    cmd << command_ << " train --state " << quote(state_dir_.string()) << " --data "
        << quote(file.string()) << " --lr " << format_exact(stage.learning_rate) << " --epochs "
        << stage.epochs << " --batch " << stage.batch_size << " --optimizer "
        << quote(stage.optimizer) << " --schedule " << quote(stage.lr_schedule) << " --seed "
        << seed;
    if (!head_.empty()) cmd << " --head " << quote(head_);
    run(cmd.str());
    ++stages_;
  }

  std::vector<int> predict(const std::vector<std::string>& texts) const override {
    if (!trained()) throw StateError("external backend is not trained");
    const std::filesystem::path input = state_dir_ / "predict_in.txt";
    const std::filesystem::path output = state_dir_ / "predict_out.txt";
    {
      std::ofstream out(input, std::ios::binary);
      for (const std::string& t : texts) out << tsv_escape(t) << "\n";
    }
    run(command_ + " predict --state " + quote(state_dir_.string()) + " --input " +
        quote(input.string()) + " --output " + quote(output.string()));
    std::ifstream in(output, std::ios::binary);
    if (!in) throw ProviderError("external backend wrote no predictions");
    std::vector<int> labels;
    std::string line;
    while (read_line(in, line)) {
      if (trim(line).empty()) continue;
      std::string v(trim(line));
      if (v != "0" && v != "1") throw ProviderError("external backend returned label '" + v + "'");
      labels.push_back(v == "1" ? 1 : 0);
    }
    return labels;
  }

  // Digest of the files under the state directory, excluding scratch files.
  std::string fingerprint() const override {
    std::uint64_t h = fnv1a64(name());
    if (!std::filesystem::exists(state_dir_)) return hex64(h);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(state_dir_)) {
      if (!entry.is_regular_file()) continue;
      const std::string fname = entry.path().filename().string();
      if (fname.rfind("predict_", 0) == 0) continue;
      files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream buf;
      buf << in.rdbuf();
      h = fnv1a64(std::filesystem::relative(f, state_dir_).string(), h);
      h = fnv1a64(buf.str(), h);
    }
    return hex64(h);
  }

  bool trained() const override { return stages_ > 0; }

  void save(std::ostream& out) const override {
    out << nlohmann::json{{"format", "taxo-external"},
                          {"command", command_},
                          {"state_dir", state_dir_.string()},
                          {"head", head_},
                          {"stages", stages_}}
               .dump()
        << "\n";
  }

  void load(std::istream& in) override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValueError(std::string("external model: ") + e.what());
    }
    if (j.value("format", "") != "taxo-external") throw ValueError("not an external-backend model");
    command_ = j.at("command").get<std::string>();
    state_dir_ = j.at("state_dir").get<std::string>();
    head_ = j.value("head", "");
    stages_ = j.at("stages").get<int>();
  }

 private:
  static std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
      if (c == '\'') out += "'\\''";
      else out += c;
    }
    return out + "'";
  }

  static void run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status != 0) {
      throw ProviderError("external backend command failed (status " + std::to_string(status) +
                          "): " + cmd);
    }
  }

  std::string command_;
  std::filesystem::path state_dir_;
  std::string head_;
  int stages_ = 0;
};

inline void register_builtin_backends() {
  static std::once_flag once;
  std::call_once(once, [] {
    BackendRegistry& r = BackendRegistry::instance();
    r.add("hashed_linear", HashedLinearBackend::create);
    r.add("tfidf_svm", TfidfSvmBackend::create);
    r.add("external", ExternalCommandBackend::create);
  });
}

inline std::unique_ptr<ClassifierBackend> make_backend(const std::string& name,
                                                       const BackendOptions& options = {}) {
  register_builtin_backends();
  return BackendRegistry::instance().create(name, options);
}

}  // namespace taxo

#endif  // TAXO_BACKENDS_HPP_

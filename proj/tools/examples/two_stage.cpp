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

// Library walk-through: prepare a toy corpus, augment it, run the two-stage
// plan on the reference backend and score the validation split.
//
//   two_stage data/toy/train_en.tsv

#include <iostream>

#include "taxo/augment.hpp"
#include "taxo/backends.hpp"
#include "taxo/corpus.hpp"
#include "taxo/eval.hpp"
#include "taxo/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: two_stage <train.tsv>\n";
    return 2;
  }
  try {
    const std::uint64_t seed = 13;
    taxo::Corpus corpus = taxo::load_task_file(argv[1], taxo::TaskMode::kBinary, {}, std::nullopt);
    taxo::DfIndex df = taxo::build_df_index(corpus);
    std::vector<std::optional<taxo::Pattern>> patterns;
    for (const auto& a : taxo::annotate_patterns(corpus, df, 0.12)) patterns.push_back(a.pattern);
    taxo::DevValSplit split = taxo::split_dev_validation(corpus, patterns, {}, 0.3, seed);

    taxo::LexiconFillModel fill({"really", "truly", "certainly"}, {"adore", "enjoy", "prefer"});
    taxo::AugmentedCorpus nlpaug = taxo::augment_binary_corpus(split.dev, fill, seed);

    // Translated data is left out here; ablation1 trains on nlpaug, then original.
    taxo::TrainingPlan plan =
        taxo::build_training_plan("ablation1", corpus.language, {"nlpaug", "original"});
    std::map<std::string, taxo::Corpus> data = {{"nlpaug", nlpaug.to_corpus()},
                                                {"original", split.dev}};
    auto backend = taxo::make_backend("hashed_linear");
    taxo::ExecutionTrace trace = taxo::execute_plan(plan, data, *backend, seed);
    std::cout << taxo::trace_to_jsonl(trace);

    std::vector<int> gold;
    for (const auto& e : split.val.examples) gold.push_back(*e.label);
    taxo::MetricsReport report;
    report.per_language[corpus.language] =
        taxo::binary_metrics(taxo::predict_labels(*backend, split.val), gold);
    std::cout << taxo::emit_report(report, taxo::ReportFormat::kTsv);
  } catch (const taxo::Error& e) {
    std::cerr << "two_stage: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

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

#include "taxo/augment.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

namespace taxo {
namespace {

using testing::make_example;
using testing::token_edit_distance;
using testing::words_of;

// Abstains everywhere.
class SilentFill : public ContextualFillModel {
 public:
  std::vector<FillCandidate> candidates(const std::vector<std::string>&, std::size_t,
                                        FillMode) const override {
    return {};
  }
};

TEST(ContextualInsert, ReallyAtGapOne) {
  FixedFillModel fill({"really"});
  Example e = make_example("1", "I like beer", 1);
  AugmentedExample out = contextual_insert_at(e, fill, {1});
  EXPECT_EQ(out.example.text, "I really like beer");
  EXPECT_EQ(out.example.label, 1);
  EXPECT_EQ(out.edits, 1);
  EXPECT_EQ(out.source_id, "1");
  EXPECT_EQ(out.operation, AugmentOperation::kInsert);
}

TEST(ContextualInsert, LabelZeroIsAllowedAndPreserved) {
  FixedFillModel fill({"really"});
  AugmentedExample out = contextual_insert(make_example("1", "I like beer", 0), fill, 2, 3);
  EXPECT_EQ(out.example.label, 0);
  EXPECT_GE(out.edits, 1);
}

TEST(ContextualInsert, FinalGapGoesBeforeClosingPunctuation) {
  FixedFillModel fill({"too"});
  AugmentedExample out = contextual_insert_at(make_example("1", "I like beer.", 1), fill, {3});
  EXPECT_EQ(out.example.text, "I like beer too.");
}

TEST(ContextualInsert, CapitalizedOpeningGapIsNotEligible) {
  std::vector<std::size_t> gaps = insertion_gaps("I like beer");
  EXPECT_EQ(gaps, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(insertion_gaps("we like beer").front(), 0u);
}

TEST(ContextualInsert, AbstentionSkipsAndFlags) {
  SilentFill fill;
  AugmentedExample out = contextual_insert(make_example("1", "I like beer", 1), fill, 2, 1);
  EXPECT_TRUE(out.skipped);
  EXPECT_EQ(out.edits, 0);
  EXPECT_EQ(out.example.text, "I like beer");
  EXPECT_TRUE(out.example.has_flag(kSkippedFlag));
}

TEST(ContextualSubstitute, AleAtPositionTwo) {
  FixedFillModel fill({"ale"});
  AugmentedExample out = contextual_substitute_at(make_example("1", "I like beer", 1), fill, {2});
  EXPECT_EQ(out.example.text, "I like ale");
  EXPECT_EQ(out.example.label, 1);
  EXPECT_EQ(out.operation, AugmentOperation::kSubstitute);
}

TEST(ContextualSubstitute, LabelZeroIsContractViolation) {
  FixedFillModel fill({"ale"});
  EXPECT_THROW(contextual_substitute(make_example("1", "I like beer", 0), fill, 2, 1),
               ContractError);
  EXPECT_THROW(contextual_substitute_at(make_example("1", "I like beer", 0), fill, {2}),
               ContractError);
}

TEST(ContextualSubstitute, CandidateEqualToOriginalFallsThrough) {
  FixedFillModel next({"beer", "ale"});
  EXPECT_EQ(contextual_substitute_at(make_example("1", "I like beer", 1), next, {2}).example.text,
            "I like ale");
  FixedFillModel same({"Beer"});
  AugmentedExample out = contextual_substitute_at(make_example("1", "I like beer", 1), same, {2});
  EXPECT_TRUE(out.skipped);
  EXPECT_EQ(out.example.text, "I like beer");
}

TEST(ContextualSubstitute, KeepsAttachedPunctuation) {
  FixedFillModel fill({"ale"});
  EXPECT_EQ(contextual_substitute_at(make_example("1", "I like beer.", 1), fill, {2}).example.text,
            "I like ale.");
}

TEST(ContextualOperations, ParameterErrors) {
  FixedFillModel fill({"x"});
  EXPECT_THROW(contextual_insert(make_example("1", "I like beer", 1), fill, 0, 1), ParameterError);
  EXPECT_THROW(contextual_insert(make_example("1", "...", 1), fill, 2, 1), PreconditionError);
}

TEST(AugmentBinaryCorpus, TenExamplesSixPositives) {
  Corpus c;
  for (int i = 0; i < 10; ++i) {
    c.examples.push_back(make_example(std::to_string(i), "I like beer number " + std::to_string(i),
                                      i < 6 ? 1 : 0));
  }
  LexiconFillModel fill({"really", "truly"}, {"ale", "wine"});
  AugmentedCorpus out = augment_binary_corpus(c, fill, 5);
  ASSERT_EQ(out.size(), 16u);
  int inserts = 0, substitutes = 0;
  for (const AugmentedExample& item : out.items) {
    (item.operation == AugmentOperation::kInsert ? inserts : substitutes)++;
  }
  EXPECT_EQ(inserts, 10);
  EXPECT_EQ(substitutes, 6);
}

TEST(AugmentBinaryCorpus, AllNegativesOnlyInsert) {
  Corpus c = testing::make_corpus({{"I like beer", 0}, {"I like wine", 0}, {"we hate tea", 0}});
  FixedFillModel fill({"really"});
  AugmentedCorpus out = augment_binary_corpus(c, fill, 1);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& item : out.items) EXPECT_EQ(item.operation, AugmentOperation::kInsert);
}

TEST(AugmentBinaryCorpus, RaisesLabelOneShare) {
  Corpus c = testing::make_corpus(
      {{"I like beer", 1}, {"I like wine", 0}, {"we hate tea", 0}, {"they love ale", 1}});
  LexiconFillModel fill({"really"}, {"cake", "soup"});
  AugmentedCorpus out = augment_binary_corpus(c, fill, 1);
  int positives = 0;
  for (const auto& item : out.items) positives += *item.example.label;
  EXPECT_GT(static_cast<double>(positives) / out.size(), 0.5);
}

TEST(AugmentBinaryCorpus, UnlabeledIsPrecondition) {
  Corpus c;
  c.examples.push_back(make_example("1", "I like beer"));
  FixedFillModel fill({"really"});
  EXPECT_THROW(augment_binary_corpus(c, fill, 1), PreconditionError);
}

TEST(LexiconFillModel, ContextDependentAndDeterministic) {
  LexiconFillModel fill({"a1", "a2", "a3", "a4", "a5"}, {}, 2);
  std::vector<std::string> tokens = {"I", "like", "beer"};
  auto first = fill.candidates(tokens, 1, FillMode::kInsert);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].token, fill.candidates(tokens, 1, FillMode::kInsert)[0].token);
  EXPECT_TRUE(fill.candidates(tokens, 0, FillMode::kSubstitute).empty());
}

TEST(WriteAugmentedFile, ProvenanceColumns) {
  Corpus c = testing::make_corpus({{"I like beer", 1}});
  FixedFillModel fill({"really"});
  std::ostringstream out;
  write_augmented_file(out, augment_binary_corpus(c, fill, 1), TaskMode::kBinary, "seed=1");
  std::string s = out.str();
  EXPECT_EQ(s.rfind("# seed=1\nID\tSentence\tLabels\tsource_id\toperation\tedits\t"
                    "source_language\tflags\n", 0), 0u);
  EXPECT_NE(s.find("\t1\tinsert\t"), std::string::npos);
  EXPECT_NE(s.find("\t1\tsubstitute\t"), std::string::npos);
}

// Random sentences mixing capitalized openings and final punctuation.
Corpus random_corpus(std::mt19937_64& rng, std::size_t n) {
  const std::vector<std::string> words = {"beer", "drink", "I", "like", "dogs,", "animals",
                                          "more", "than", "a", "kind", "of", "wine."};
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    std::size_t len = 1 + rng() % 9;
    for (std::size_t k = 0; k < len; ++k) text += (k ? " " : "") + words[rng() % words.size()];
    c.examples.push_back(make_example(std::to_string(i), text, static_cast<int>(rng() % 2)));
  }
  return c;
}

TEST(AugmentProperty, EditCountsLabelsAndProvenance) {
  std::mt19937_64 rng(99);
  Corpus c = random_corpus(rng, 250);
  FixedFillModel fixed({"really", "certainly", "ale"});
  LexiconFillModel lexicon({"often", "still", "truly"}, {"adore", "prefer", "enjoy"});
  for (const ContextualFillModel* fill : {static_cast<const ContextualFillModel*>(&fixed),
                                          static_cast<const ContextualFillModel*>(&lexicon)}) {
    AugmentedCorpus out = augment_binary_corpus(c, *fill, 17);
    std::map<std::string, const Example*> by_id;
    for (const Example& e : c.examples) by_id[e.id] = &e;
    for (const AugmentedExample& item : out.items) {
      const Example& source = *by_id.at(item.source_id);
      ASSERT_FALSE(item.skipped) << source.text;
      EXPECT_GE(item.edits, 1);
      EXPECT_LE(item.edits, 2);
      std::size_t d = token_edit_distance(words_of(source.text), words_of(item.example.text));
      EXPECT_GE(d, 1u) << source.text << " -> " << item.example.text;
      EXPECT_LE(d, static_cast<std::size_t>(item.edits));
      EXPECT_EQ(item.example.label, source.label);
      if (item.operation == AugmentOperation::kSubstitute) {
        EXPECT_EQ(source.label, 1);
      }
    }
  }
}

TEST(AugmentProperty, SameSeedSameCorpus) {
  std::mt19937_64 rng(3);
  Corpus c = random_corpus(rng, 100);
  LexiconFillModel fill({"often", "still", "truly"}, {"adore", "prefer", "enjoy"});
  std::ostringstream a, b, other;
  write_augmented_file(a, augment_binary_corpus(c, fill, 8), TaskMode::kBinary);
  write_augmented_file(b, augment_binary_corpus(c, fill, 8), TaskMode::kBinary);
  write_augmented_file(other, augment_binary_corpus(c, fill, 9), TaskMode::kBinary);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), other.str());
}

}  // namespace
}  // namespace taxo

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

#include "taxo/corpus.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_support.hpp"

namespace taxo {
namespace {

using testing::make_example;

Corpus parse(const std::string& body, TaskMode mode = TaskMode::kBinary) {
  std::istringstream in(body);
  return parse_task_file(in, mode, ColumnMap{}, Language::kEn);
}

TEST(ParseTaskFile, BinaryRow) {
  Corpus c = parse("ID\tSentence\tLabels\n17\tI like beer\t1\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.examples[0].id, "17");
  EXPECT_EQ(c.examples[0].text, "I like beer");
  EXPECT_EQ(c.examples[0].label, 1);
  EXPECT_FALSE(c.examples[0].score.has_value());
}

TEST(ParseTaskFile, LikertRow) {
  Corpus c = parse("ID\tSentence\tScore\n4\tI like beer\t3.5\n", TaskMode::kLikert);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(*c.examples[0].score, 3.5);
}

TEST(ParseTaskFile, LabelOutOfDomainNamesRow) {
  try {
    parse("ID\tSentence\tLabels\n1\tok\t0\n2\tbad\t2\n");
    FAIL() << "expected ValueError";
  } catch (const ValueError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
  }
}

TEST(ParseTaskFile, ScoreOutOfRange) {
  EXPECT_THROW(parse("ID\tSentence\tScore\n1\tx y\t7.5\n", TaskMode::kLikert), ValueError);
  EXPECT_THROW(parse("ID\tSentence\tScore\n1\tx y\tabc\n", TaskMode::kLikert), ValueError);
}

TEST(ParseTaskFile, MissingColumnIsNamed) {
  try {
    parse("ID\tText\tLabels\n1\tx\t1\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("Sentence"), std::string::npos);
  }
}

TEST(ParseTaskFile, CustomColumnsCommentsAndCrlf) {
  std::istringstream in("# generated\r\nlabel\tsent\tkey\r\n1\thello there\tk1\r\n\r\n");
  ColumnMap columns{"key", "sent", "label"};
  Corpus c = parse_task_file(in, TaskMode::kBinary, columns, Language::kFr);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.examples[0].id, "k1");
  EXPECT_EQ(c.examples[0].text, "hello there");
  EXPECT_EQ(c.language, Language::kFr);
}

TEST(ParseTaskFile, WriteThenParseRoundTrips) {
  Corpus c = testing::make_corpus({{"I like beer, and drinks too.", 1}, {"tab\there", 0}});
  std::ostringstream out;
  write_task_file(out, c, TaskMode::kBinary, "seed=3");
  Corpus back = parse(out.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.examples[1].text, "tab\there");
  EXPECT_EQ(back.examples[0].label, 1);
}

TEST(LanguageFromPath, Suffix) {
  EXPECT_EQ(language_from_path("data/train_it.tsv"), Language::kIt);
  EXPECT_EQ(language_from_path("train.tsv"), std::nullopt);
}

TEST(Tokenize, StripsPunctuationAndKeepsSpans) {
  std::string text = "\xC2\xAB" "Bonjour\xC2\xBB, l'ami!";
  std::vector<Token> tokens = tokenize(text);
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0].text, "Bonjour");
  EXPECT_EQ(text.substr(tokens[0].span.begin, tokens[0].span.length()), "Bonjour");
  EXPECT_EQ(tokens[1].text, "l'ami");
}

// --- document frequency --------------------------------------------------

TEST(DfIndex, HundredSentencesBeerInTwo) {
  Corpus c;
  for (int i = 0; i < 100; ++i) {
    std::string text = i < 2 ? "I like beer" : "I like item" + std::to_string(i);
    c.examples.push_back(make_example(std::to_string(i), text));
  }
  DfIndex df = build_df_index(c);
  EXPECT_DOUBLE_EQ(df.of("beer"), 0.02);
  EXPECT_DOUBLE_EQ(df.of("like"), 1.0);
  EXPECT_DOUBLE_EQ(df.of("absent"), 0.0);
}

TEST(DfIndex, RepeatedTokenCountsOncePerDocument) {
  Corpus c = testing::make_corpus({{"beer beer beer", 1}, {"wine", 0}, {"water", 0}, {"tea", 1}});
  EXPECT_DOUBLE_EQ(build_df_index(c).of("beer"), 0.25);
}

TEST(DfIndex, EmptyCorpusIsPrecondition) {
  EXPECT_THROW(build_df_index(Corpus{}), PreconditionError);
}

TEST(DfIndex, MatchesContainmentOracleOnRandomCorpora) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> vocab = {"beer", "Drink", "wine", "the", "a", "Tea.", "(cake)",
                                          "dog,", "cat", "animal!"};
  for (int trial = 0; trial < 50; ++trial) {
    Corpus c;
    std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      std::size_t len = 1 + rng() % 8;
      for (std::size_t k = 0; k < len; ++k) text += vocab[rng() % vocab.size()] + " ";
      c.examples.push_back(make_example(std::to_string(i), text));
    }
    DfIndex df = build_df_index(c);
    std::map<std::string, int> counts;
    for (const Example& e : c.examples) {
      for (const std::string& t : testing::naive_token_set(e.text)) ++counts[t];
    }
    ASSERT_EQ(df.df.size(), counts.size());
    for (const auto& [token, count] : counts) {
      EXPECT_DOUBLE_EQ(df.of(token), static_cast<double>(count) / n) << token;
    }
  }
}

// --- nouns and patterns --------------------------------------------------

// Corpus where function words are frequent and "beer"/"drink" are rare.
Corpus beer_corpus() {
  Corpus c;
  c.examples.push_back(make_example("0", "I don't like beer, a special kind of drink"));
  for (int i = 1; i < 40; ++i) {
    c.examples.push_back(make_example(std::to_string(i), "I don't like x, a special kind of y"));
  }
  return c;
}

TEST(ExtractNouns, BeerDrink) {
  Corpus c = beer_corpus();
  NounPair p = extract_nouns(c.examples[0], build_df_index(c));
  EXPECT_EQ(p.noun1, "beer");
  EXPECT_EQ(p.noun2, "drink");
  EXPECT_NO_THROW(validate_noun_pair(c.examples[0].text, p));
}

TEST(ExtractNouns, OnlyFunctionWordsCarriesCountZero) {
  Corpus c = beer_corpus();
  try {
    extract_nouns(make_example("q", "I don't like a special kind"), build_df_index(c));
    FAIL();
  } catch (const ExtractionError& e) {
    EXPECT_EQ(e.found(), 0u);
  }
}

TEST(ExtractNouns, LowestPairAmongThreeCandidates) {
  DfIndex df;
  df.documents = 100;
  df.df = {{"alpha", 0.04}, {"beta", 0.01}, {"gamma", 0.02}, {"the", 0.9}};
  Example e = make_example("1", "the alpha the beta the gamma");
  NounPair p = extract_nouns(e, df);
  // Oracle: enumerate every candidate pair and keep the lowest df sum.
  std::vector<Token> tokens = tokenize(e.text);
  double best = 1e9;
  std::pair<std::string, std::string> expected;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      double a = df.of(tokens[i].text), b = df.of(tokens[j].text);
      if (a >= 0.05 || b >= 0.05) continue;
      if (a + b < best) {
        best = a + b;
        expected = {tokens[i].text, tokens[j].text};
      }
    }
  }
  EXPECT_EQ(p.noun1, expected.first);
  EXPECT_EQ(p.noun2, expected.second);
  EXPECT_EQ(p.noun1, "beta");
  EXPECT_EQ(p.noun2, "gamma");
}

TEST(ExtractNouns, FallbackMarksResult) {
  DfIndex df;
  df.df = {{"i", 0.9}, {"like", 0.5}, {"beer", 0.2}};
  NounExtraction x = extract_nouns_or_fallback(make_example("1", "I like beer"), df);
  EXPECT_TRUE(x.fallback);
  EXPECT_EQ(x.nouns.noun1, "like");
  EXPECT_EQ(x.nouns.noun2, "beer");
  EXPECT_THROW(extract_nouns_or_fallback(make_example("2", "beer"), df), ExtractionError);
}

TEST(DerivePattern, SpecialKindOf) {
  Corpus c = beer_corpus();
  const Example& e = c.examples[0];
  NounPair nouns = extract_nouns(e, build_df_index(c));
  Pattern p = derive_pattern(e, nouns);
  EXPECT_EQ(p.template_text, "I don't like " + std::string(kPlaceholder) +
                                 ", a special kind of " + std::string(kPlaceholder));
  EXPECT_EQ(fill_pattern(p, "beer", "drink"), e.text);
}

TEST(DerivePattern, NounAtSentenceStart) {
  Example e = make_example("1", "Beer, and more specifically ale.");
  NounPair nouns{"Beer", "ale", {0, 4}, {28, 31}};
  Pattern p = derive_pattern(e, nouns);
  EXPECT_EQ(p.template_text.find(kPlaceholder), 0u);
  EXPECT_EQ(p.template_text, std::string(kPlaceholder) + ", and more specifically " +
                                 std::string(kPlaceholder) + ".");
  EXPECT_EQ(fill_pattern(p, nouns.noun1, nouns.noun2), e.text);
}

TEST(DerivePattern, OverlappingSpansRejected) {
  Example e = make_example("1", "I like beer");
  NounPair overlap{"beer", "eer", {7, 11}, {8, 11}};
  EXPECT_THROW(derive_pattern(e, overlap), InvariantError);
  NounPair reversed{"beer", "like", {7, 11}, {2, 6}};
  EXPECT_THROW(derive_pattern(e, reversed), InvariantError);
}

TEST(DerivePattern, RoundTripOnRandomSentences) {
  std::mt19937_64 rng(11);
  Corpus c = testing::random_pattern_corpus(rng, 200, 8);
  DfIndex df = build_df_index(c);
  std::vector<PatternAnnotation> ann = annotate_patterns(c, df);
  for (std::size_t i = 0; i < c.size(); ++i) {
    ASSERT_TRUE(ann[i].pattern.has_value());
    EXPECT_FALSE(ann[i].fallback);
    EXPECT_EQ(count_placeholders(ann[i].pattern->template_text), 2u);
    EXPECT_EQ(fill_pattern(*ann[i].pattern, ann[i].nouns->noun1, ann[i].nouns->noun2),
              c.examples[i].text);
  }
}

// --- dev/validation split ------------------------------------------------

struct PatternedCorpus {
  Corpus corpus;
  std::vector<std::optional<Pattern>> patterns;
};

Pattern frame(int k) { return {"frame " + std::to_string(k) + " " + std::string(kPlaceholder) +
                                   " " + std::string(kPlaceholder), Language::kEn}; }

PatternedCorpus patterned(const std::vector<int>& frame_of, std::mt19937_64& rng) {
  PatternedCorpus pc;
  for (std::size_t i = 0; i < frame_of.size(); ++i) {
    pc.corpus.examples.push_back(
        make_example(std::to_string(i), "s" + std::to_string(i), static_cast<int>(rng() % 2)));
    pc.patterns.push_back(frame(frame_of[i]));
  }
  return pc;
}

TEST(SplitDevValidation, ThousandWithHundredComplex) {
  std::mt19937_64 rng(5);
  std::vector<int> frames(1000);
  for (int i = 0; i < 1000; ++i) frames[i] = i % 10 == 3 ? 0 : 1 + (i % 7);
  PatternedCorpus pc = patterned(frames, rng);
  DevValSplit s = split_dev_validation(pc.corpus, pc.patterns, {frame(0)}, 0.3, 42);
  EXPECT_EQ(s.dev.size(), 300u);
  EXPECT_EQ(s.val.size(), 700u);
  std::size_t complex_in_val = 0;
  std::set<std::string> val_ids;
  for (const Example& e : s.val.examples) val_ids.insert(e.id);
  for (std::size_t i = 0; i < 1000; ++i) {
    if (frames[i] == 0) complex_in_val += val_ids.count(std::to_string(i));
  }
  EXPECT_EQ(complex_in_val, 100u);
  for (std::size_t i : s.dev_indices) EXPECT_NE(frames[i], 0);
}

TEST(SplitDevValidation, NoComplexPatternsIsPlainSplit) {
  std::mt19937_64 rng(9);
  PatternedCorpus pc = patterned(std::vector<int>(50, 1), rng);
  DevValSplit s = split_dev_validation(pc.corpus, pc.patterns, {}, 0.3, 1);
  EXPECT_EQ(s.dev.size(), 15u);
  EXPECT_EQ(s.val.size(), 35u);
}

TEST(SplitDevValidation, EightyPercentComplexIsInfeasible) {
  std::mt19937_64 rng(9);
  std::vector<int> frames(100);
  for (int i = 0; i < 100; ++i) frames[i] = i < 80 ? 0 : 1;
  PatternedCorpus pc = patterned(frames, rng);
  EXPECT_THROW(split_dev_validation(pc.corpus, pc.patterns, {frame(0)}, 0.3, 1), InfeasibleError);
}

TEST(SplitDevValidation, ParameterAndShapeErrors) {
  std::mt19937_64 rng(9);
  PatternedCorpus pc = patterned(std::vector<int>(10, 1), rng);
  EXPECT_THROW(split_dev_validation(pc.corpus, pc.patterns, {}, 1.5, 1), ParameterError);
  pc.patterns.pop_back();
  EXPECT_THROW(split_dev_validation(pc.corpus, pc.patterns, {}, 0.3, 1), ShapeError);
}

TEST(SplitDevValidation, ComplexPatternMustBePresent) {
  std::mt19937_64 rng(9);
  PatternedCorpus pc = patterned(std::vector<int>(10, 1), rng);
  EXPECT_THROW(split_dev_validation(pc.corpus, pc.patterns, {frame(5)}, 0.3, 1),
               PreconditionError);
}

TEST(SplitDevValidationProperty, RandomCorpora) {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 10 + rng() % 300;
    std::vector<int> frames(n);
    for (int& f : frames) f = static_cast<int>(rng() % 6);
    PatternedCorpus pc = patterned(frames, rng);
    std::set<Pattern> present;
    for (const auto& p : pc.patterns) present.insert(*p);
    std::set<Pattern> complex;
    for (const Pattern& p : present) {
      if (rng() % 4 == 0) complex.insert(p);
    }
    std::size_t complex_count = 0;
    for (const auto& p : pc.patterns) complex_count += complex.count(*p);
    const double target = 0.3 * static_cast<double>(n);
    if (static_cast<double>(n - complex_count) + 0.5 < target) {
      EXPECT_THROW(split_dev_validation(pc.corpus, pc.patterns, complex, 0.3, trial),
                   InfeasibleError);
      continue;
    }
    DevValSplit s = split_dev_validation(pc.corpus, pc.patterns, complex, 0.3, trial);
    EXPECT_EQ(s.dev.size() + s.val.size(), n);
    EXPECT_LE(std::abs(static_cast<double>(s.dev.size()) - target), 1.0);
    std::set<std::string> dev_ids, val_ids;
    for (const Example& e : s.dev.examples) dev_ids.insert(e.id);
    for (const Example& e : s.val.examples) val_ids.insert(e.id);
    for (const std::string& id : dev_ids) EXPECT_EQ(val_ids.count(id), 0u);
    for (std::size_t i : s.dev_indices) EXPECT_EQ(complex.count(*pc.patterns[i]), 0u);

    DevValSplit again = split_dev_validation(pc.corpus, pc.patterns, complex, 0.3, trial);
    EXPECT_EQ(again.dev_indices, s.dev_indices);
  }
}

TEST(SplitDevValidation, StratifiesByLabel) {
  Corpus c;
  std::vector<std::optional<Pattern>> patterns;
  for (int i = 0; i < 100; ++i) {
    c.examples.push_back(make_example(std::to_string(i), "s", i < 20 ? 1 : 0));
    patterns.push_back(frame(1));
  }
  DevValSplit s = split_dev_validation(c, patterns, {}, 0.3, 3);
  int positives = 0;
  for (const Example& e : s.dev.examples) positives += *e.label;
  EXPECT_EQ(positives, 6);
}

}  // namespace
}  // namespace taxo

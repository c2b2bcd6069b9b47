// Copyright 2026 The samie Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "samie/corpus.hpp"
#include "samie/synthetic.hpp"
#include "samie/vocab.hpp"

namespace samie {
namespace {

std::string data_path(const std::string& name) { return std::string(SAMIE_DATA_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("samie_corpus_test_" + name);
  std::ofstream(path) << contents;
  return path.string();
}

AnnotatedSentence running_example() { return toy_corpus().front(); }

std::vector<AnnotatedSentence> numbered_corpus(std::size_t n) {
  std::vector<AnnotatedSentence> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"n" + std::to_string(i), {"to", "boston"}, {{"toloc", 1, 2}}});
  return out;
}

TEST(LoadSlotCorpus, DecodesOneRecord) {
  std::istringstream in(
      R"({"id":"a","tokens":["show","flights","to","Boston"],"slots":[{"category":"toloc","start":3,"end":4}]})");
  const auto c = read_slot_corpus(in);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].tokens.size(), 4u);
  ASSERT_EQ(c[0].slots.size(), 1u);
  EXPECT_EQ(c[0].slots[0], (SlotAnnotation{"toloc", 3, 4}));
}

TEST(LoadSlotCorpus, EmptyFileGivesEmptyList) {
  EXPECT_TRUE(load_slot_corpus(temp_file("empty.jsonl", "")).empty());
}

TEST(LoadSlotCorpus, EmptySpanRejected) {
  std::istringstream in(R"({"id":"a","tokens":["a","b","c","d"],"slots":[{"category":"toloc","start":3,"end":3}]})");
  EXPECT_THROW(read_slot_corpus(in), ValidationError);
}

TEST(LoadSlotCorpus, MalformedLineNamesLineNumber) {
  std::istringstream in("{\"id\":\"a\",\"tokens\":[\"x\"],\"slots\":[]}\n{not json\n");
  try {
    read_slot_corpus(in, "f.jsonl");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("f.jsonl"), std::string::npos);
  }
}

TEST(LoadSlotCorpus, OverlapNamesSentence) {
  std::istringstream in(
      R"({"id":"bad7","tokens":["a","b","c"],"slots":[{"category":"x","start":0,"end":2},{"category":"y","start":1,"end":3}]})");
  try {
    read_slot_corpus(in);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos);
  }
}

TEST(LoadSlotCorpus, SerializationRoundTrip) {
  const auto corpus = generate_flight_corpus({200, 1.3}, 5);
  std::stringstream buf;
  write_slot_corpus(buf, corpus);
  EXPECT_EQ(read_slot_corpus(buf), corpus);
}

TEST(LoadSlotCorpus, ShippedCorporaAreValid) {
  const auto toy = load_slot_corpus(data_path("toy.jsonl"));
  EXPECT_EQ(toy, toy_corpus());
  const auto flights = load_slot_corpus(data_path("flights.jsonl"));
  EXPECT_EQ(flights.size(), 3000u);
  EXPECT_EQ(filter_for_bank(flights, default_atis_bank()).size(), flights.size());
}

TEST(LoadQuestionBank, DefaultBanks) {
  const auto atis = load_question_bank(data_path("atis_bank.json"));
  EXPECT_EQ(atis.size(), 7u);
  EXPECT_EQ(atis.categories(), (std::vector<CategoryId>{"airline", "arrive_time", "depart_time", "return_time",
                                                        "fromloc", "toloc", "stoploc"}));
  const auto cec = load_question_bank(data_path("cec_bank.json"));
  EXPECT_EQ(cec.categories(), (std::vector<CategoryId>{"time", "location", "denoter", "participant"}));
}

TEST(LoadQuestionBank, SingleGroup) {
  EXPECT_EQ(load_question_bank(temp_file("one.json", R"({"toloc": ["where to?"]})")).size(), 1u);
}

TEST(LoadQuestionBank, Rejections) {
  EXPECT_THROW(load_question_bank(temp_file("dup.json", R"({"a": ["x"], "a": ["y"]})")), ValidationError);
  EXPECT_THROW(load_question_bank(temp_file("emptygroup.json", R"({"a": []})")), ValidationError);
  EXPECT_THROW(load_question_bank(temp_file("nogroups.json", "{}")), ValidationError);
  EXPECT_THROW(load_question_bank(temp_file("shared.json", R"({"a": ["q?"], "b": ["q?"]})")), ValidationError);
  EXPECT_THROW(load_question_bank(temp_file("broken.json", R"({"a": )")), ValidationError);
}

TEST(MakeTriplets, RunningExampleYieldsThree) {
  Rng rng(1);
  const auto s = running_example();
  const auto t = make_triplets(s, default_atis_bank(), rng);
  ASSERT_EQ(t.size(), 3u);
  const auto bank = default_atis_bank();
  for (const auto& x : t) {
    const auto& qs = bank.group(*bank.index_of(x.category)).questions;
    EXPECT_NE(std::find(qs.begin(), qs.end(), x.question), qs.end());
    // One contiguous run equal to a gold span.
    const auto first = std::find(x.answer_mask.begin(), x.answer_mask.end(), 1);
    const auto last = std::find(first, x.answer_mask.end(), 0);
    EXPECT_EQ(std::count(x.answer_mask.begin(), x.answer_mask.end(), 1), last - first);
  }
  EXPECT_EQ(t[2].category, "arrive_time");
  EXPECT_EQ(t[2].answer_mask, (AnswerMask{0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1}));
}

TEST(MakeTriplets, NoSlotsAndUnknownCategory) {
  Rng rng(1);
  EXPECT_TRUE(make_triplets({"e", {"hello"}, {}}, default_atis_bank(), rng).empty());
  try {
    make_triplets({"u", {"x"}, {{"meal", 0, 1}}}, default_atis_bank(), rng);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("meal"), std::string::npos);
  }
}

TEST(MakeTriplets, SingletonGroupAlwaysChosen) {
  const QuestionBank bank(std::vector<QuestionBank::Group>{{"toloc", {"where to?"}}});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(make_triplets({"a", {"to", "x"}, {{"toloc", 1, 2}}}, bank, rng)[0].question, "where to?");
  }
}

TEST(MakeTriplets, DeterministicGivenSeed) {
  const auto bank = default_atis_bank();
  for (const auto& s : generate_flight_corpus({50, 1.3}, 3)) {
    Rng a(9), b(9);
    const auto x = make_triplets(s, bank, a), y = make_triplets(s, bank, b);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].question, y[i].question);
  }
}

TEST(MakeSaPairs, MasksMatchTriplets) {
  const auto s = running_example();
  const auto pairs = make_sa_pairs(s);
  EXPECT_EQ(pairs.size(), 3u);
  EXPECT_TRUE(make_sa_pairs({"e", {"x"}, {}}).empty());
  const auto bank = default_atis_bank();
  for (const auto& sent : generate_flight_corpus({100, 1.3}, 4)) {
    Rng rng(0);
    std::set<AnswerMask> a, b;
    for (const auto& p : make_sa_pairs(sent)) a.insert(p.answer_mask);
    for (const auto& t : make_triplets(sent, bank, rng)) b.insert(t.answer_mask);
    EXPECT_EQ(a, b);
  }
}

TEST(SplitDataset, Sizes) {
  auto s = split_dataset(numbered_corpus(100), 0.15, 1);
  EXPECT_EQ(s.train.size(), 85u);
  EXPECT_EQ(s.test.size(), 15u);
  s = split_dataset(numbered_corpus(3439), 0.15, 1);
  EXPECT_EQ(s.train.size(), 2923u);
  EXPECT_EQ(s.test.size(), 516u);
}

TEST(SplitDataset, DeterministicPartition) {
  const auto corpus = numbered_corpus(300);
  const auto a = split_dataset(corpus, 0.15, 77), b = split_dataset(corpus, 0.15, 77);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  std::set<std::string> train_ids, test_ids;
  for (const auto& s : a.train) train_ids.insert(s.id);
  for (const auto& s : a.test) test_ids.insert(s.id);
  EXPECT_EQ(train_ids.size() + test_ids.size(), corpus.size());
  for (const auto& id : test_ids) EXPECT_EQ(train_ids.count(id), 0u);
  EXPECT_NE(split_dataset(corpus, 0.15, 78).test, a.test);
}

TEST(SplitDataset, Rejections) {
  EXPECT_THROW(split_dataset(numbered_corpus(10), 0.0, 1), ValidationError);
  EXPECT_THROW(split_dataset(numbered_corpus(10), 1.0, 1), ValidationError);
  EXPECT_THROW(split_dataset({}, 0.5, 1), ValidationError);
}

TEST(SampleLabeledSubset, CountsAndDeterminism) {
  const auto bank = default_atis_bank();
  const auto train = generate_flight_corpus({800, 1.3}, 8);
  const auto sub = sample_labeled_subset(train, 512, bank, 3);
  EXPECT_EQ(sub.labeled_ids.size(), 512u);
  std::set<std::string> labeled(sub.labeled_ids.begin(), sub.labeled_ids.end());
  std::size_t triplets = 0, pairs = 0;
  for (const auto& s : train) (labeled.count(s.id) ? triplets : pairs) += s.slots.size();
  EXPECT_EQ(sub.labeled.size(), triplets);
  EXPECT_EQ(sub.unlabeled.size(), pairs);
  for (const auto& t : sub.labeled) EXPECT_EQ(labeled.count(t.sentence.id), 1u);
  for (const auto& p : sub.unlabeled) EXPECT_EQ(labeled.count(p.sentence.id), 0u);

  const auto again = sample_labeled_subset(train, 512, bank, 3);
  EXPECT_EQ(again.labeled_ids, sub.labeled_ids);
  for (std::size_t i = 0; i < sub.labeled.size(); ++i) EXPECT_EQ(again.labeled[i].question, sub.labeled[i].question);

  EXPECT_TRUE(sample_labeled_subset(train, train.size(), bank, 3).unlabeled.empty());
  EXPECT_THROW(sample_labeled_subset(train, train.size() + 1, bank, 3), ValidationError);
}

TEST(SampleCandidateSet, SingletonBankIsUnique) {
  const QuestionBank bank(std::vector<QuestionBank::Group>{{"a", {"x?"}}, {"b", {"y?"}}});
  Rng rng(3);
  const auto c = sample_candidate_set(bank, rng);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.entries[0].question, "x?");
  EXPECT_EQ(c.entries[1].question, "y?");
}

TEST(SampleCandidateSet, DeclaredOrderAndOwnGroup) {
  const auto bank = default_atis_bank();
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = sample_candidate_set(bank, rng);
    ASSERT_EQ(c.size(), 7u);
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_EQ(c.entries[i].category, bank.group(i).category);
      const auto& qs = bank.group(i).questions;
      EXPECT_NE(std::find(qs.begin(), qs.end(), c.entries[i].question), qs.end());
    }
  }
}

TEST(SampleCandidateSet, UniformOverTwoQuestions) {
  const QuestionBank bank(std::vector<QuestionBank::Group>{{"a", {"first?", "second?"}}});
  Rng rng(2026);
  int first = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) first += sample_candidate_set(bank, rng).entries[0].question == "first?";
  const double f = static_cast<double>(first) / n;
  EXPECT_GE(f, 0.49);
  EXPECT_LE(f, 0.51);
}

TEST(ReadBio, ConvertsTags) {
  std::istringstream in(
      "show O\nflights O\nfrom O\nnew B-fromloc.city_name\nyork I-fromloc.city_name\nto O\n"
      "boston B-toloc.city_name\n\nlist O\nunited B-airline_name\n");
  const auto c = read_bio(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].slots, (std::vector<SlotAnnotation>{{"fromloc", 3, 5}, {"toloc", 6, 7}}));
  EXPECT_EQ(c[1].slots, (std::vector<SlotAnnotation>{{"airline_name", 1, 2}}));
}

TEST(ReadBio, BadTagNamesLine) {
  std::istringstream in("a O\nb X-foo\n");
  try {
    read_bio(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(FilterForBank, DropsUnknownCategoriesAndOverlaps) {
  std::vector<AnnotatedSentence> corpus = {
      {"ok", {"to", "x"}, {{"toloc", 1, 2}}},
      {"meal", {"a", "b"}, {{"meal_description", 0, 1}}},
      {"overlap", {"a", "b", "c"}, {{"toloc", 0, 2}, {"fromloc", 1, 3}}},
  };
  FilterReport rep;
  const auto kept = filter_for_bank(corpus, default_atis_bank(), &rep);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].id, "ok");
  EXPECT_EQ(rep.dropped.size(), 2u);
}

TEST(Synthetic, DeterministicAndWellFormed) {
  const auto a = generate_flight_corpus({300, 1.3}, 11), b = generate_flight_corpus({300, 1.3}, 11);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, generate_flight_corpus({300, 1.3}, 12));
  std::set<CategoryId> seen;
  for (const auto& s : a) {
    EXPECT_NO_THROW(validate_sentence(s));
    for (const auto& slot : s.slots) seen.insert(slot.category);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Vocabulary, SpecialIdsAndQuestions) {
  const auto v = build_vocabulary(toy_corpus(), default_atis_bank());
  EXPECT_EQ(v.id("<pad>"), Vocabulary::kPad);
  EXPECT_EQ(v.id("never-seen"), Vocabulary::kUnk);
  EXPECT_EQ(v.id("Shanghai"), v.id("shanghai"));
  EXPECT_EQ(tokenize_question("where to?"), (std::vector<std::string>{"where", "to", "?"}));
  EXPECT_NE(v.id("?"), Vocabulary::kUnk);
  EXPECT_EQ(Vocabulary::from_words(v.words()), v);
}

}  // namespace
}  // namespace samie

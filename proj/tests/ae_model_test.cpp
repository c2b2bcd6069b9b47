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

#include "samie/ae_model.hpp"
#include "samie/synthetic.hpp"
#include "test_util.hpp"

namespace samie {
namespace {

using testing::random_matrix;
using testing::tiny_config;

QuestionDistribution dist_for(std::vector<Real> probs) {
  QuestionDistribution d;
  d.probs = std::move(probs);
  for (std::size_t i = 0; i < d.probs.size(); ++i) d.candidate_set.entries.push_back({"c" + std::to_string(i), "q?"});
  return d;
}

TEST(AnswerLogits, ShapeMaskingAndComposition) {
  DualModel m(tiny_config(), 31);
  m.dense_layer().b->value(0, 0) = 50.0;  // every real position positive
  const auto s = encode(m, {2, 3, 4, 0, 0}, EncoderRole::Sentence);
  const auto q = encode(m, {5, 6}, EncoderRole::Question);
  const auto l = answer_logits(m, s, q);
  ASSERT_EQ(l.logits.size(), 5u);
  EXPECT_GT(l.logits[0], 0);
  EXPECT_FALSE(l.logits[3] > 0);
  EXPECT_FALSE(l.logits[4] > 0);

  // Stepwise oracle: decoder, then the affine map.
  const auto h = decode_merge(m, s, q, DecoderRole::AnswerExtraction);
  const Matrix& w = m.dense_layer().w->value;
  for (int r = 0; r < 3; ++r) EXPECT_NEAR(l.logits[r], (h.states.row(r) * w)(0, 0) + 50.0, 1e-12);
}

TEST(ExtractAnswer, SignRule) {
  EXPECT_EQ(extract_answer({{2.1, -0.3, 0.5, -4.0}}).bits, (AnswerMask{1, 0, 1, 0}));
  EXPECT_TRUE(extract_answer({{-1, -2, -0.1}}).empty());
  EXPECT_EQ(extract_answer({{1, 2, 0.1}}).bits, (AnswerMask{1, 1, 1}));
  EXPECT_EQ(extract_answer({{0.0}}).bits, (AnswerMask{0}));
}

TEST(ExtractAnswer, NegationComplements) {
  Rng rng(2);
  const Matrix v = random_matrix(1, 40, rng);
  AnswerLogits a, b;
  for (int i = 0; i < 40; ++i) {
    a.logits.push_back(v(0, i));
    b.logits.push_back(-v(0, i));
  }
  const auto x = extract_answer(a).bits, y = extract_answer(b).bits;
  for (int i = 0; i < 40; ++i) EXPECT_EQ(x[i], 1 - y[i]);
}

TEST(VerifyAnswer, Examples) {
  const AnswerMask mask = {0, 1, 1, 0};
  EXPECT_EQ(verify_answer(mask, dist_for({0.8, 0.2}), "c0", 0.5), mask);
  EXPECT_FALSE(verify_answer(mask, dist_for({0.3, 0.7}), "c0", 0.5));
  EXPECT_FALSE(verify_answer({0, 0, 0, 0}, dist_for({0.99, 0.01}), "c0", 0.5));
  EXPECT_THROW(verify_answer(mask, dist_for({0.5, 0.5}), "missing", 0.5), ValidationError);
}

TEST(VerifyAnswer, NeverReturnsEmpty) {
  Rng rng(3);
  std::bernoulli_distribution bit(0.2);
  std::uniform_real_distribution<Real> u(0, 1);
  for (int rep = 0; rep < 1000; ++rep) {
    AnswerMask m(5);
    for (auto& b : m) b = bit(rng);
    const Real p = u(rng);
    const auto r = verify_answer(m, dist_for({p, 1 - p}), "c0", 0.5);
    if (r) {
      EXPECT_FALSE(ExtractedAnswer{*r}.empty());
    }
  }
}

TEST(PredictAnswerLogits, MatchesSingleSequencePath) {
  const auto bank = default_atis_bank();
  const auto corpus = toy_corpus();
  const auto vocab = build_vocabulary(corpus, bank);
  ModelConfig c = tiny_config();
  c.vocab_size = static_cast<int>(vocab.size());
  c.max_len = 16;
  DualModel m(c, 32);
  const auto cands = first_candidate_set(bank);
  std::vector<TokenizedExample> examples;
  std::vector<int> qi;
  for (const auto& s : corpus)
    for (const auto& slot : s.slots) {
      examples.push_back(tokenize_example(s, s.mask_of(slot), vocab, slot.category));
      qi.push_back(static_cast<int>(*bank.index_of(slot.category)));
    }
  const auto got = predict_answer_logits(m, vocab, examples, qi, cands, 3);
  ASSERT_EQ(got.size(), examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto q = encode(m, vocab.encode(tokenize_question(cands.entries[qi[i]].question)), EncoderRole::Question);
    const auto want = answer_logits(m, encode(m, examples[i].sentence, EncoderRole::Sentence), q);
    ASSERT_EQ(got[i].logits.size(), examples[i].sentence.size());
    for (std::size_t t = 0; t < want.logits.size(); ++t) EXPECT_NEAR(got[i].logits[t], want.logits[t], 1e-12);
  }
  qi[0] = 7;
  EXPECT_THROW(predict_answer_logits(m, vocab, examples, qi, cands), ValidationError);
}

}  // namespace
}  // namespace samie

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

// Token-id views of triplets, pairs and candidate sets, ready to be packed.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "samie/backbone.hpp"
#include "samie/corpus.hpp"
#include "samie/vocab.hpp"

namespace samie {

struct TokenizedExample {
  std::vector<int> sentence;
  std::vector<int> answer;       // sentence tokens under the mask, in order
  std::vector<Real> mask;        // 0/1 per sentence token
  std::string category;          // empty for (s, a)-pairs
};

inline TokenizedExample tokenize_example(const AnnotatedSentence& s, const AnswerMask& mask, const Vocabulary& vocab,
                                         std::string category = {}) {
  if (mask.size() != s.tokens.size()) throw ValidationError("answer mask length differs from sentence " + s.id);
  TokenizedExample e;
  e.sentence = vocab.encode(s.tokens);
  e.mask.assign(mask.begin(), mask.end());
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) e.answer.push_back(e.sentence[i]);
  if (e.answer.empty()) throw ValidationError("empty answer in sentence " + s.id);
  e.category = std::move(category);
  return e;
}

inline TokenizedExample tokenize(const Triplet& t, const Vocabulary& vocab) {
  return tokenize_example(t.sentence, t.answer_mask, vocab, t.category);
}

inline TokenizedExample tokenize(const SAPair& p, const Vocabulary& vocab) {
  return tokenize_example(p.sentence, p.answer_mask, vocab);
}

inline PackedSequences pack_questions(const CandidateSet& c, const Vocabulary& vocab) {
  PackedSequences p;
  for (const auto& e : c.entries) {
    const auto ids = vocab.encode(tokenize_question(e.question));
    if (ids.empty()) throw ValidationError("empty question for category " + e.category);
    p.push(ids);
  }
  return p;
}

struct PackedExamples {
  PackedSequences sentences;
  PackedSequences answers;
  std::vector<Real> mask;  // concatenated per-token targets, aligned with sentences.ids
};

inline PackedExamples pack_examples(const std::vector<const TokenizedExample*>& batch) {
  PackedExamples out;
  for (const auto* e : batch) {
    out.sentences.push(e->sentence);
    out.answers.push(e->answer);
    out.mask.insert(out.mask.end(), e->mask.begin(), e->mask.end());
  }
  return out;
}

}  // namespace samie

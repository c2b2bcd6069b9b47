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


// Answer extraction: per-token logits from Decoder_0(sentence, question)
// followed by the dense layer, the positive-logit rule, and verification of
// an extracted answer through question selection.

#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/batch.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/model.hpp"
#include "samie/qs_model.hpp"
#include "samie/vocab.hpp"

namespace samie {

struct AnswerLogits {
  std::vector<Real> logits;  // one per sentence token; -inf at padding
};

struct ExtractedAnswer {
  AnswerMask bits;

  bool empty() const { return std::none_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }); }
};

inline AnswerLogits answer_logits(const DualModel& model, const EncodedSequence& s_enc, const EncodedSequence& q_enc) {
  const EncodedSequence h = decode_merge(model, s_enc, q_enc, DecoderRole::AnswerExtraction);
  AnswerLogits out{dense(model, h.states)};
  for (std::size_t i = 0; i < out.logits.size(); ++i)
    if (s_enc.padding_mask[i]) out.logits[i] = -std::numeric_limits<Real>::infinity();
  return out;
}

// bit = 1 iff logit > 0.
inline ExtractedAnswer extract_answer(const AnswerLogits& logits) {
  ExtractedAnswer a;
  for (Real l : logits.logits) a.bits.push_back(l > 0);
  return a;
}

// Accepts a non-empty mask when the asked category's probability exceeds p_th.
inline std::optional<AnswerMask> verify_answer(const AnswerMask& mask, const QuestionDistribution& dist,
                                               const CategoryId& asked_category, Real p_th) {
  const auto idx = dist.candidate_set.index_of(asked_category);
  if (!idx) throw ValidationError("asked category " + asked_category + " is not among the candidates");
  if (*idx >= dist.probs.size()) throw ValidationError("distribution is shorter than its candidate set");
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; })) return std::nullopt;
  if (dist.probs[*idx] > p_th) return mask;
  return std::nullopt;
}

// Logits for examples[i] answered against candidate question_index[i].
inline std::vector<AnswerLogits> predict_answer_logits(const DualModel& model, const Vocabulary& vocab,
                                                       const std::vector<TokenizedExample>& examples,
                                                       const std::vector<int>& question_index,
                                                       const CandidateSet& cands, std::size_t chunk = 256) {
  if (question_index.size() != examples.size()) throw ValidationError("one question index per example is required");
  std::vector<AnswerLogits> out;
  out.reserve(examples.size());
  const PackedSequences qpacked = pack_questions(cands, vocab);
  for (std::size_t lo = 0; lo < examples.size(); lo += chunk) {
    const std::size_t hi = std::min(examples.size(), lo + chunk);
    PackedSequences sentences;
    MergePlan plan;
    for (std::size_t i = lo; i < hi; ++i) {
      if (question_index[i] < 0 || static_cast<std::size_t>(question_index[i]) >= cands.size())
        throw ValidationError("question index out of range");
      sentences.push(examples[i].sentence);
      plan.add(static_cast<int>(i - lo), question_index[i]);
    }
    Tape t(false);
    EncodedBatch q = model.encode(t, qpacked, EncoderRole::Question);
    EncodedBatch s = model.encode(t, sentences, EncoderRole::Sentence);
    EncodedBatch h = model.answer_states(t, s, q, plan);
    const Matrix& logits = t.value(model.dense(t, h.states));
    for (int p = 0; p < h.seg.size(); ++p) {
      AnswerLogits a;
      for (int r = 0; r < h.seg.length(p); ++r) {
        const int row = h.seg.begin(p) + r;
        a.logits.push_back(h.valid[row] ? logits(row, 0) : -std::numeric_limits<Real>::infinity());
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace samie

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


// Question selection: cosine relevance of each candidate question to a
// (sentence, answer) pair, the softmax(k * score) distribution over the
// candidates, and thresholded selection.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/batch.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/model.hpp"
#include "samie/vocab.hpp"

namespace samie {

struct QuestionScores {
  std::vector<Real> scores;  // one cosine per candidate, in [-1, 1]
};

struct QuestionDistribution {
  std::vector<Real> probs;
  CandidateSet candidate_set;
};

// Cosine of two row vectors; 0 when either has zero norm.
inline Real cosine_similarity(const RowVector& a, const RowVector& b) {
  const Real na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  return std::clamp(a.dot(b) / (na * nb), Real(-1), Real(1));
}

// cosine(mean of q_enc, mean of Decoder_1(s_enc, a_enc)); padding excluded.
inline Real score_question(const DualModel& model, const EncodedSequence& s_enc, const EncodedSequence& a_enc,
                           const EncodedSequence& q_enc) {
  Tape t(false);
  EncodedBatch s = to_batch(t, s_enc), a = to_batch(t, a_enc), q = to_batch(t, q_enc);
  return t.value(model.question_scores(t, s, a, q))(0, 0);
}

inline QuestionDistribution question_distribution(const QuestionScores& scores, Real k, const CandidateSet& cands = {}) {
  if (scores.scores.empty()) throw ValidationError("question distribution needs at least one candidate");
  if (!(k >= 1)) throw ValidationError("k must be at least 1");
  if (!cands.entries.empty() && cands.size() != scores.scores.size())
    throw ValidationError("score count differs from the candidate count");
  QuestionDistribution d;
  d.candidate_set = cands;
  const Real mx = *std::max_element(scores.scores.begin(), scores.scores.end());
  Real z = 0;
  for (Real s : scores.scores) {
    d.probs.push_back(std::exp(k * (s - mx)));
    z += d.probs.back();
  }
  for (Real& p : d.probs) p /= z;
  return d;
}

// Index of the most probable candidate (lowest index on ties) if its
// probability exceeds p_th.
inline std::optional<std::size_t> select_question_index(const QuestionDistribution& dist, Real p_th) {
  if (dist.probs.empty()) return std::nullopt;
  const auto best = static_cast<std::size_t>(std::max_element(dist.probs.begin(), dist.probs.end()) - dist.probs.begin());
  if (dist.probs[best] > p_th) return best;
  return std::nullopt;
}

inline std::optional<CandidateSet::Entry> select_question(const QuestionDistribution& dist, Real p_th) {
  const auto idx = select_question_index(dist, p_th);
  if (!idx) return std::nullopt;
  if (*idx >= dist.candidate_set.size()) throw ValidationError("distribution carries no candidate set");
  return dist.candidate_set.entries[*idx];
}

// Distributions for many (sentence, answer) examples against one candidate
// set, in chunks of `chunk` examples.
inline std::vector<QuestionDistribution> predict_question_distributions(const DualModel& model, const Vocabulary& vocab,
                                                                        const std::vector<TokenizedExample>& examples,
                                                                        const CandidateSet& cands,
                                                                        std::size_t chunk = 256) {
  std::vector<QuestionDistribution> out;
  out.reserve(examples.size());
  const PackedSequences qpacked = pack_questions(cands, vocab);
  for (std::size_t lo = 0; lo < examples.size(); lo += chunk) {
    const std::size_t hi = std::min(examples.size(), lo + chunk);
    std::vector<const TokenizedExample*> batch;
    for (std::size_t i = lo; i < hi; ++i) batch.push_back(&examples[i]);
    const PackedExamples packed = pack_examples(batch);
    Tape t(false);
    EncodedBatch q = model.encode(t, qpacked, EncoderRole::Question);
    EncodedBatch s = model.encode(t, packed.sentences, EncoderRole::Sentence);
    EncodedBatch a = model.encode(t, packed.answers, EncoderRole::Answer);
    const Matrix& scores = t.value(model.question_scores(t, s, a, q));
    for (Eigen::Index b = 0; b < scores.rows(); ++b) {
      QuestionScores qs;
      for (Eigen::Index i = 0; i < scores.cols(); ++i) qs.scores.push_back(scores(b, i));
      out.push_back(question_distribution(qs, model.config().k, cands));
    }
  }
  return out;
}

}  // namespace samie

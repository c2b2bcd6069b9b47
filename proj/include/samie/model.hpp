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

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/backbone.hpp"
#include "samie/config.hpp"
#include "samie/error.hpp"
#include "samie/recurrent.hpp"

namespace samie {

// Question-selection and answer-extraction sub-models over one shared
// backbone. Parameters of both live in a single store; the embeddings and
// the sentence/question encoders belong to both.
class DualModel {
 public:
  DualModel(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
    config_.validate();
    Rng rng(init_seed);
    if (config_.architecture == Architecture::Transformer) {
      backbone_ = std::make_unique<TransformerBackbone>(config_, *store_, rng);
    } else {
      backbone_ = std::make_unique<RecurrentBackbone>(config_, *store_, rng);
    }
    dense_ = Linear::create(*store_, "dense", config_.d_model, 1, rng);
  }

  DualModel(DualModel&&) = default;
  DualModel& operator=(DualModel&&) = default;

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return *store_; }
  const ParameterStore& parameters() const { return *store_; }
  const Backbone& backbone() const { return *backbone_; }
  const Linear& dense_layer() const { return dense_; }

  EncodedBatch encode(Tape& t, const PackedSequences& in, EncoderRole role) const {
    return backbone_->encode(t, in, role);
  }

  EncodedBatch merge(Tape& t, const EncodedBatch& x, const EncodedBatch& y, const MergePlan& plan,
                     DecoderRole role) const {
    return backbone_->merge(t, x, y, plan, role);
  }

  // One logit per row.
  Var dense(Tape& t, Var h) const { return dense_(t, h); }

  // Cosine relevance between every (sentence, answer) pair b and every
  // question i: mean(Decoder_1(s_b, a_b)) against mean(q_i). Returns B x C.
  Var question_scores(Tape& t, const EncodedBatch& sentences, const EncodedBatch& answers,
                      const EncodedBatch& questions) const {
    MergePlan plan;
    for (int b = 0; b < sentences.seg.size(); ++b) plan.add(b, b);
    EncodedBatch merged = merge(t, sentences, answers, plan, DecoderRole::QuestionSelection);
    Var v_sa = ops::segment_mean(t, merged.states, merged.seg, merged.valid);
    Var v_q = ops::segment_mean(t, questions.states, questions.seg, questions.valid);
    return ops::cosine_matrix(t, v_sa, v_q);
  }

  // Answer logits for the (sentence, question) segment pairs in `plan`,
  // packed in plan order.
  EncodedBatch answer_states(Tape& t, const EncodedBatch& sentences, const EncodedBatch& questions,
                             const MergePlan& plan) const {
    return merge(t, sentences, questions, plan, DecoderRole::AnswerExtraction);
  }

 private:
  ModelConfig config_;
  std::unique_ptr<ParameterStore> store_ = std::make_unique<ParameterStore>();
  std::unique_ptr<Backbone> backbone_;
  Linear dense_;
};

// Single-sequence forms of the backbone operations, evaluated without
// recording gradients.

inline EncodedBatch to_batch(Tape& t, const EncodedSequence& e) {
  if (e.padding_mask.size() != static_cast<std::size_t>(e.states.rows()))
    throw ValidationError("padding mask length differs from the state count");
  EncodedBatch b{t.constant(e.states), {}, {}};
  b.seg.push(static_cast<int>(e.states.rows()));
  for (auto m : e.padding_mask) b.valid.push_back(m == 0);
  return b;
}

inline EncodedSequence to_sequence(const Tape& t, const EncodedBatch& b) {
  EncodedSequence e{t.value(b.states), {}};
  for (auto v : b.valid) e.padding_mask.push_back(v == 0);
  return e;
}

inline Matrix embed(const DualModel& model, const std::vector<int>& tokens) {
  Tape t(false);
  return t.value(model.backbone().embed(t, PackedSequences::of({tokens})));
}

inline EncodedSequence encode(const DualModel& model, const std::vector<int>& tokens, EncoderRole role) {
  Tape t(false);
  return to_sequence(t, model.encode(t, PackedSequences::of({tokens}), role));
}

inline EncodedSequence decode_merge(const DualModel& model, const EncodedSequence& x, const EncodedSequence& y,
                                    DecoderRole role) {
  Tape t(false);
  MergePlan plan;
  plan.add(0, 0);
  return to_sequence(t, model.merge(t, to_batch(t, x), to_batch(t, y), plan, role));
}

// One logit per row of h.
inline std::vector<Real> dense(const DualModel& model, const Matrix& h) {
  Tape t(false);
  const Matrix out = t.value(model.dense(t, t.constant(h)));
  return {out.data(), out.data() + out.rows()};
}

}  // namespace samie

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

// Joint training of the question-selection and answer-extraction heads.
//
// The supervised term is cross-entropy over the candidate questions plus a
// per-token answer cost; the unsupervised term runs answer extraction once
// per candidate question and weights the C answer costs by
// softmax(k * question scores). The two are mixed with a ramped lambda:
//
//   total = lambda * loss_u + (1 - lambda) * (loss_s_Q + loss_s_A)

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/batch.hpp"
#include "samie/config.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/model.hpp"
#include "samie/random.hpp"
#include "samie/vocab.hpp"

namespace samie {

struct LossBreakdown {
  long step = 0;
  double loss_s_Q = 0;
  double loss_s_A = 0;
  double loss_u = 0;
  double lambda = 0;
  double total = 0;
  // Batch mean of the smallest per-candidate answer cost; loss_u never
  // falls below it.
  double min_candidate_cost = 0;
};

inline nlohmann::ordered_json to_json(const LossBreakdown& b) {
  return {{"step", b.step},     {"loss_s_Q", b.loss_s_Q}, {"loss_s_A", b.loss_s_A},
          {"loss_u", b.loss_u}, {"lambda", b.lambda},     {"total", b.total},
          {"min_candidate_cost", b.min_candidate_cost}};
}

inline double joint_loss(double loss_s, double loss_u, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0,1]");
  return lambda * loss_u + (1.0 - lambda) * loss_s;
}

// Linear ramp from lambda_start (step 0) to lambda_end (step ramp_steps).
inline double lambda_at(long step, const ScheduleConfig& sched) {
  if (step < 0) throw ValidationError("step must be non-negative");
  if (step >= sched.ramp_steps) return sched.lambda_end;
  const double frac = static_cast<double>(step) / static_cast<double>(sched.ramp_steps);
  return sched.lambda_start + (sched.lambda_end - sched.lambda_start) * frac;
}

// ---------------------------------------------------------------------------
// Loss graphs

struct SupervisedTerms {
  Var loss_q;  // mean cross-entropy against the labeled category
  Var loss_a;  // mean per-triplet answer cost
};

struct UnsupervisedTerms {
  Var loss_u;
  Matrix scores;  // B x C cosine scores
  Matrix costs;   // B x C answer costs, one per candidate question
};

// Category index of every example within the candidate set.
inline std::vector<int> candidate_labels(const std::vector<const TokenizedExample*>& batch, const CandidateSet& cands) {
  std::vector<int> labels;
  for (const auto* e : batch) {
    const auto idx = cands.index_of(e->category);
    if (!idx) throw ValidationError("labeled category " + e->category + " is not among the candidate questions");
    labels.push_back(static_cast<int>(*idx));
  }
  return labels;
}

// The answer-extraction question of a labeled example is the candidate of
// its own category.
inline SupervisedTerms supervised_terms(Tape& t, const DualModel& model, const std::vector<const TokenizedExample*>& batch,
                                        const CandidateSet& cands, const EncodedBatch& questions) {
  const std::vector<int> labels = candidate_labels(batch, cands);
  const PackedExamples packed = pack_examples(batch);
  EncodedBatch s = model.encode(t, packed.sentences, EncoderRole::Sentence);
  EncodedBatch a = model.encode(t, packed.answers, EncoderRole::Answer);
  Var scores = model.question_scores(t, s, a, questions);
  Var loss_q = ops::softmax_cross_entropy(t, ops::scale(t, scores, model.config().k), labels);
  MergePlan plan;
  for (std::size_t b = 0; b < batch.size(); ++b) plan.add(static_cast<int>(b), labels[b]);
  EncodedBatch h = model.answer_states(t, s, questions, plan);
  Var cost = ops::segment_bce(t, model.dense(t, h.states), packed.mask, h.seg, h.valid);
  return {loss_q, ops::mean_all(t, cost)};
}

inline UnsupervisedTerms unsupervised_terms(Tape& t, const DualModel& model,
                                            const std::vector<const TokenizedExample*>& batch,
                                            const EncodedBatch& questions, bool detach_weights = false) {
  const int n_cand = questions.seg.size();
  const PackedExamples packed = pack_examples(batch);
  EncodedBatch s = model.encode(t, packed.sentences, EncoderRole::Sentence);
  EncodedBatch a = model.encode(t, packed.answers, EncoderRole::Answer);
  Var scores = model.question_scores(t, s, a, questions);
  MergePlan plan;
  std::vector<Real> targets;
  for (std::size_t b = 0; b < batch.size(); ++b)
    for (int i = 0; i < n_cand; ++i) {
      plan.add(static_cast<int>(b), i);
      targets.insert(targets.end(), batch[b]->mask.begin(), batch[b]->mask.end());
    }
  EncodedBatch h = model.answer_states(t, s, questions, plan);
  Var per_pair = ops::segment_bce(t, model.dense(t, h.states), std::move(targets), h.seg, h.valid);
  Var costs = ops::reshape(t, per_pair, static_cast<Eigen::Index>(batch.size()), n_cand);
  Var loss = ops::softmax_weighted_cost(t, ops::scale(t, scores, model.config().k), costs, detach_weights);
  return {loss, t.value(scores), t.value(costs)};
}

// Scalar forms for inspection and tests.

inline std::pair<double, double> supervised_loss(const DualModel& model, const Vocabulary& vocab,
                                                 const std::vector<Triplet>& batch, const CandidateSet& cands) {
  std::vector<TokenizedExample> tok;
  for (const auto& tr : batch) tok.push_back(tokenize(tr, vocab));
  std::vector<const TokenizedExample*> ptrs;
  for (const auto& e : tok) ptrs.push_back(&e);
  Tape t(false);
  EncodedBatch q = model.encode(t, pack_questions(cands, vocab), EncoderRole::Question);
  auto terms = supervised_terms(t, model, ptrs, cands, q);
  return {t.scalar(terms.loss_q), t.scalar(terms.loss_a)};
}

struct UnsupervisedValue {
  double loss_u = 0;
  Matrix scores;
  Matrix costs;
};

inline UnsupervisedValue unsupervised_loss(const DualModel& model, const Vocabulary& vocab,
                                           const std::vector<SAPair>& batch, const CandidateSet& cands) {
  std::vector<TokenizedExample> tok;
  for (const auto& p : batch) tok.push_back(tokenize(p, vocab));
  std::vector<const TokenizedExample*> ptrs;
  for (const auto& e : tok) ptrs.push_back(&e);
  Tape t(false);
  EncodedBatch q = model.encode(t, pack_questions(cands, vocab), EncoderRole::Question);
  auto terms = unsupervised_terms(t, model, ptrs, q);
  return {t.scalar(terms.loss_u), std::move(terms.scores), std::move(terms.costs)};
}

// mean_b sum_i softmax(k * scores_b)_i * costs_b,i for given scores and costs.
inline double weighted_candidate_cost(const Matrix& scores, const Matrix& costs, double k) {
  Tape t(false);
  Var s = t.constant(scores);
  Var c = t.constant(costs);
  return t.scalar(ops::softmax_weighted_cost(t, ops::scale(t, s, k), c));
}

// ---------------------------------------------------------------------------
// Optimizer

class Adam {
 public:
  Adam(const OptimizerConfig& cfg, const ParameterStore& store) : cfg_(cfg) {
    for (std::size_t i = 0; i < store.size(); ++i) {
      m_.push_back(Matrix::Zero(store[i].value.rows(), store[i].value.cols()));
      v_.push_back(Matrix::Zero(store[i].value.rows(), store[i].value.cols()));
    }
  }

  void step(ParameterStore& store) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < store.size(); ++i) {
      Parameter& p = store[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
      p.value.array() -= cfg_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.epsilon);
    }
  }

 private:
  OptimizerConfig cfg_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop

// Cycles through a shuffled index order, reshuffling at every epoch.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, Rng rng) : rng_(std::move(rng)), order_(n) {
    std::iota(order_.begin(), order_.end(), 0);
    pos_ = n;
  }

  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    if (order_.empty()) return out;
    while (out.size() < batch) {
      if (pos_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct TrainOptions {
  // Permit an empty labeled set (unsupervised clustering mode).
  bool allow_no_labeled = false;
  // Called after every step with the recorded breakdown.
  std::function<void(const LossBreakdown&)> on_step;
};

struct TrainResult {
  DualModel model;
  Vocabulary vocab;
  TrainConfig config;
  std::vector<LossBreakdown> history;
};

// Both loss terms are per-token or per-example cross-entropies, so a healthy
// run stays orders of magnitude below this. Adam bounds every update by the
// learning rate, which keeps an exploding run finite for a long time; the
// ceiling catches it at the first step instead.
inline constexpr double kDivergenceCeiling = 1e6;

inline bool all_finite(const ParameterStore& store, bool grads) {
  for (std::size_t i = 0; i < store.size(); ++i)
    if (!(grads ? store[i].grad : store[i].value).allFinite()) return false;
  return true;
}

// Seed streams: 0 initialisation, 1 labeled batches, 2 unlabeled batches,
// 3 candidate questions.
inline TrainResult train(TrainConfig config, const Vocabulary& vocab, const std::vector<Triplet>& labeled,
                         const std::vector<SAPair>& unlabeled, const QuestionBank& bank, std::uint64_t seed,
                         const TrainOptions& options = {}) {
  if (labeled.empty() && !options.allow_no_labeled) throw ValidationError("training needs at least one labeled triplet");
  if (labeled.empty() && unlabeled.empty()) throw ValidationError("training needs data");
  config.model.vocab_size = static_cast<int>(vocab.size());
  config.validate();
  const ScheduleConfig sched = config.effective_schedule();

  std::vector<TokenizedExample> lab, unl;
  lab.reserve(labeled.size());
  unl.reserve(unlabeled.size());
  for (const auto& t : labeled) {
    if (!bank.contains(t.category)) throw ValidationError("triplet category " + t.category + " not in question bank");
    lab.push_back(tokenize(t, vocab));
  }
  for (const auto& p : unlabeled) unl.push_back(tokenize(p, vocab));

  Rng init = make_stream(seed, 0);
  DualModel model(config.model, init());
  Adam adam(config.optimizer, model.parameters());
  BatchSampler lab_sampler(lab.size(), make_stream(seed, 1));
  BatchSampler unl_sampler(unl.size(), make_stream(seed, 2));
  Rng cand_rng = make_stream(seed, 3);

  std::vector<LossBreakdown> history;
  history.reserve(static_cast<std::size_t>(config.optimizer.steps));
  for (long step = 0; step < config.optimizer.steps; ++step) {
    const double lambda = lambda_at(step, sched);
    const CandidateSet cands = sample_candidate_set(bank, cand_rng);
    std::vector<const TokenizedExample*> lb, ub;
    for (std::size_t i : lab_sampler.next(static_cast<std::size_t>(config.optimizer.labeled_batch))) lb.push_back(&lab[i]);
    for (std::size_t i : unl_sampler.next(static_cast<std::size_t>(config.optimizer.unlabeled_batch))) ub.push_back(&unl[i]);

    Tape t;
    EncodedBatch questions = model.encode(t, pack_questions(cands, vocab), EncoderRole::Question);
    LossBreakdown rec;
    rec.step = step;
    rec.lambda = lambda;
    std::optional<Var> sup, uns;
    if (!lb.empty()) {
      auto terms = supervised_terms(t, model, lb, cands, questions);
      rec.loss_s_Q = t.scalar(terms.loss_q);
      rec.loss_s_A = t.scalar(terms.loss_a);
      sup = ops::add(t, terms.loss_q, terms.loss_a);
    }
    if (!ub.empty()) {
      auto terms = unsupervised_terms(t, model, ub, questions);
      rec.loss_u = t.scalar(terms.loss_u);
      rec.min_candidate_cost = terms.costs.rowwise().minCoeff().mean();
      uns = terms.loss_u;
    }
    Var total;
    if (sup && uns) {
      total = ops::axpby(t, lambda, *uns, 1.0 - lambda, *sup);
    } else if (sup) {
      total = ops::scale(t, *sup, 1.0 - lambda);
    } else {
      total = ops::scale(t, *uns, lambda);
    }
    rec.total = t.scalar(total);
    if (!std::isfinite(rec.total)) throw DivergenceError(step, "total loss is not finite");
    if (rec.total > kDivergenceCeiling)
      throw DivergenceError(step, "total loss " + std::to_string(rec.total) + " exceeds the divergence ceiling");

    model.parameters().zero_grad();
    t.backward(total);
    if (!all_finite(model.parameters(), true)) throw DivergenceError(step, "non-finite gradient");
    adam.step(model.parameters());
    if (!all_finite(model.parameters(), false)) throw DivergenceError(step, "non-finite parameter after update");

    history.push_back(rec);
    if (options.on_step) options.on_step(rec);
  }
  return {std::move(model), vocab, config, std::move(history)};
}

inline void write_metric_log(std::ostream& out, const std::vector<LossBreakdown>& history) {
  for (const auto& b : history) out << to_json(b).dump() << '\n';
}

}  // namespace samie

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

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "samie/ae_model.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/model.hpp"
#include "samie/qs_model.hpp"
#include "samie/vocab.hpp"

namespace samie {

// Fraction of exact matches; a missing prediction counts as wrong.
inline double qs_accuracy(const std::vector<std::optional<CategoryId>>& predictions, const std::vector<CategoryId>& gold) {
  if (predictions.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  if (gold.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += predictions[i].has_value() && *predictions[i] == gold[i];
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

struct WordPRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long tp = 0;
  long fp = 0;
  long fn = 0;

  static WordPRF from_counts(long tp, long fp, long fn) {
    WordPRF r{0, 0, 0, tp, fp, fn};
    r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
  }
};

// Every token position is scored on its own; there is no span credit.
inline WordPRF ae_word_prf(const std::vector<AnswerMask>& predicted, const std::vector<AnswerMask>& gold) {
  if (predicted.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != gold[i].size())
      throw ValidationError("mask length mismatch at instance " + std::to_string(i));
    for (std::size_t t = 0; t < gold[i].size(); ++t) {
      const bool p = predicted[i][t] != 0, g = gold[i][t] != 0;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
  }
  return WordPRF::from_counts(tp, fp, fn);
}

// Rows are gold categories, columns predicted categories (or clusters).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n = 0) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  long at(std::size_t gold, std::size_t pred) const { return cells_[gold * n_ + pred]; }
  long& at(std::size_t gold, std::size_t pred) { return cells_[gold * n_ + pred]; }

  long row_sum(std::size_t g) const {
    long s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += at(g, p);
    return s;
  }
  long total() const { return std::accumulate(cells_.begin(), cells_.end(), 0L); }
  long trace() const {
    long s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < n_; ++g) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t p = 0; p < n_; ++p) row.push_back(at(g, p));
      rows.push_back(row);
    }
    return rows;
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<long> cells_;
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& predicted, const std::vector<int>& gold, std::size_t n) {
  if (predicted.size() != gold.size()) throw ValidationError("prediction and gold counts differ");
  ConfusionMatrix m(n);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(gold[i]) >= n ||
        static_cast<std::size_t>(predicted[i]) >= n)
      throw ValidationError("category index out of range at instance " + std::to_string(i));
    ++m.at(static_cast<std::size_t>(gold[i]), static_cast<std::size_t>(predicted[i]));
  }
  return m;
}

struct Alignment {
  std::vector<int> permutation;  // gold row g is matched with predicted column permutation[g]
  double accuracy = 0;
};

// Maximum-trace column assignment (Hungarian method, O(n^3)).
inline Alignment clustering_alignment(const ConfusionMatrix& m) {
  const int n = static_cast<int>(m.size());
  Alignment out;
  if (n == 0) return out;
  long mx = 0;
  for (int g = 0; g < n; ++g)
    for (int p = 0; p < n; ++p) mx = std::max(mx, m.at(g, p));
  // Minimise cost = mx - count, 1-based potentials.
  const long inf = std::numeric_limits<long>::max() / 4;
  std::vector<long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long cur = (mx - m.at(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.permutation.assign(n, 0);
  for (int j = 1; j <= n; ++j) out.permutation[match[j] - 1] = j - 1;
  long hit = 0;
  for (int g = 0; g < n; ++g) hit += m.at(g, out.permutation[g]);
  const long total = m.total();
  out.accuracy = total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
  return out;
}

// Column g of the result is column permutation[g] of m, so an alignment's
// matches land on the diagonal.
inline ConfusionMatrix permute_columns(const ConfusionMatrix& m, const std::vector<int>& permutation) {
  if (permutation.size() != m.size()) throw ValidationError("permutation size differs from the matrix");
  ConfusionMatrix out(m.size());
  for (std::size_t g = 0; g < m.size(); ++g)
    for (std::size_t c = 0; c < m.size(); ++c) out.at(g, c) = m.at(g, static_cast<std::size_t>(permutation[c]));
  return out;
}

// Smallest number of predicted columns holding at least `fraction` of row g.
inline int columns_covering(const ConfusionMatrix& m, std::size_t g, double fraction) {
  std::vector<long> row;
  for (std::size_t p = 0; p < m.size(); ++p) row.push_back(m.at(g, p));
  std::sort(row.rbegin(), row.rend());
  const long total = m.row_sum(g);
  long acc = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (static_cast<double>(acc) >= fraction * static_cast<double>(total)) return static_cast<int>(i);
    acc += row[i];
  }
  return static_cast<int>(row.size());
}

struct ExperimentReport {
  std::vector<CategoryId> categories;
  std::size_t qs_instances = 0;
  double qs_accuracy = 0;
  // Accuracy when predictions at or below p_th count as abstentions.
  double qs_accuracy_thresholded = 0;
  double qs_selected_fraction = 0;
  WordPRF ae;
  ConfusionMatrix confusion;
  Alignment alignment;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["categories"] = categories;
    j["qs"] = {{"instances", qs_instances},
               {"accuracy", qs_accuracy},
               {"accuracy_thresholded", qs_accuracy_thresholded},
               {"selected_fraction", qs_selected_fraction}};
    j["ae"] = {{"precision", ae.precision}, {"recall", ae.recall}, {"f1", ae.f1},
               {"tp", ae.tp},               {"fp", ae.fp},         {"fn", ae.fn}};
    j["confusion"] = confusion.to_json();
    j["alignment"] = {{"permutation", alignment.permutation}, {"accuracy", alignment.accuracy}};
    return j;
  }
};

// Question selection from gold answers and answer extraction from gold
// questions, with the first question of every group as the candidate set.
inline ExperimentReport evaluate_model(const DualModel& model, const Vocabulary& vocab,
                                       const std::vector<AnnotatedSentence>& testset, const QuestionBank& bank,
                                       double p_th) {
  if (static_cast<int>(vocab.size()) != model.config().vocab_size)
    throw ValidationError("vocabulary size " + std::to_string(vocab.size()) + " does not match the model's " +
                          std::to_string(model.config().vocab_size));
  const CandidateSet cands = first_candidate_set(bank);
  std::vector<TokenizedExample> examples;
  std::vector<int> gold;
  for (const auto& s : testset)
    for (const auto& slot : s.slots) {
      const auto idx = bank.index_of(slot.category);
      if (!idx) throw ValidationError("test sentence " + s.id + " uses category " + slot.category + " outside the bank");
      examples.push_back(tokenize_example(s, s.mask_of(slot), vocab, slot.category));
      gold.push_back(static_cast<int>(*idx));
    }

  ExperimentReport r;
  r.categories = bank.categories();
  r.qs_instances = examples.size();
  const auto dists = predict_question_distributions(model, vocab, examples, cands);
  std::vector<int> predicted;
  std::size_t hit = 0, hit_th = 0, selected = 0;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const int arg = static_cast<int>(std::max_element(dists[i].probs.begin(), dists[i].probs.end()) - dists[i].probs.begin());
    predicted.push_back(arg);
    hit += arg == gold[i];
    if (select_question(dists[i], p_th)) {
      ++selected;
      hit_th += arg == gold[i];
    }
  }
  const double n = std::max<double>(1.0, static_cast<double>(examples.size()));
  r.qs_accuracy = static_cast<double>(hit) / n;
  r.qs_accuracy_thresholded = static_cast<double>(hit_th) / n;
  r.qs_selected_fraction = static_cast<double>(selected) / n;
  r.confusion = confusion_matrix(predicted, gold, bank.size());
  r.alignment = clustering_alignment(r.confusion);

  const auto logits = predict_answer_logits(model, vocab, examples, gold, cands);
  std::vector<AnswerMask> pred_masks, gold_masks;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    pred_masks.push_back(extract_answer(logits[i]).bits);
    AnswerMask g;
    for (Real m : examples[i].mask) g.push_back(m > 0.5);
    gold_masks.push_back(std::move(g));
  }
  r.ae = ae_word_prf(pred_masks, gold_masks);
  return r;
}

}  // namespace samie

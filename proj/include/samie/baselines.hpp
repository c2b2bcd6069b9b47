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


// Supervised-only reference models and the labeled-size sweep that compares
// them with joint training.

#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "samie/config.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/evaluation.hpp"
#include "samie/training.hpp"
#include "samie/vocab.hpp"

namespace samie {

struct BaselineKind {
  Architecture architecture = Architecture::Transformer;
  Preset size = Preset::Regular;
};

// Optimizes the supervised loss only: lambda is pinned to 0 and no (s, a)
// pairs are used.
inline TrainResult train_baseline(const BaselineKind& kind, const std::vector<Triplet>& labeled, TrainConfig config,
                                  const Vocabulary& vocab, const QuestionBank& bank, std::uint64_t seed,
                                  const TrainOptions& options = {}) {
  if (labeled.empty()) throw ValidationError("a baseline needs labeled triplets");
  const ModelConfig base = config.model;
  config.model = ModelConfig::from_preset(kind.size);
  config.model.architecture = kind.architecture;
  config.model.max_len = base.max_len;
  config.model.k = base.k;
  config.model.p_th = base.p_th;
  config.schedule = {0.0, 0.0, 0};
  return train(config, vocab, labeled, {}, bank, seed, options);
}

// Unsupervised part only (lambda pinned to 1), no labeled triplets.
inline TrainResult train_clustering(TrainConfig config, const Vocabulary& vocab, const std::vector<SAPair>& unlabeled,
                                    const QuestionBank& bank, std::uint64_t seed, TrainOptions options = {}) {
  if (unlabeled.empty()) throw ValidationError("clustering needs (s, a)-pairs");
  config.schedule = {1.0, 1.0, 0};
  options.allow_no_labeled = true;
  return train(config, vocab, {}, unlabeled, bank, seed, options);
}

// A model kind in a sweep: joint training or one of the baselines.
struct SweepKind {
  std::string name;  // "samie", "transformer" or "bilstm"
  Preset size = Preset::Regular;

  std::string label() const { return name + "-" + to_string(size); }
};

inline SweepKind parse_sweep_kind(const std::string& s) {
  const auto dash = s.rfind('-');
  SweepKind k;
  k.name = dash == std::string::npos ? s : s.substr(0, dash);
  k.size = dash == std::string::npos ? Preset::Regular : parse_preset(s.substr(dash + 1));
  if (k.name != "samie" && k.name != "transformer" && k.name != "bilstm")
    throw ValidationError("unknown model kind " + s + " (expected samie, transformer or bilstm with -small/-regular)");
  return k;
}

struct SweepData {
  std::vector<AnnotatedSentence> train;
  std::vector<AnnotatedSentence> test;
  QuestionBank bank;
  Vocabulary vocab;
};

struct SweepCell {
  SweepKind kind;
  std::size_t labeled_size = 0;
  std::uint64_t seed = 0;
  ExperimentReport report;
  double seconds = 0;

  std::string key() const {
    return kind.label() + "_n" + std::to_string(labeled_size) + "_s" + std::to_string(seed);
  }
};

inline nlohmann::ordered_json to_json(const SweepCell& c) {
  return {{"kind", c.kind.name},   {"size", to_string(c.kind.size)}, {"labeled_size", c.labeled_size},
          {"seed", c.seed},        {"seconds", c.seconds},           {"report", c.report.to_json()}};
}

// Trains one cell. The labeled subset depends on (labeled_size, seed) only,
// so every kind sees the same triplets.
inline TrainResult train_cell(const SweepKind& kind, std::size_t labeled_size, std::uint64_t seed,
                              const SweepData& data, const TrainConfig& base) {
  const LabeledSubset subset = sample_labeled_subset(data.train, labeled_size, data.bank, seed);
  if (kind.name == "samie") {
    TrainConfig cfg = base;
    const ModelConfig m = base.model;
    cfg.model = ModelConfig::from_preset(kind.size);
    cfg.model.max_len = m.max_len;
    cfg.model.k = m.k;
    cfg.model.p_th = m.p_th;
    if (subset.labeled.empty()) return train_clustering(cfg, data.vocab, subset.unlabeled, data.bank, seed);
    return train(cfg, data.vocab, subset.labeled, subset.unlabeled, data.bank, seed);
  }
  const BaselineKind bk{kind.name == "bilstm" ? Architecture::Recurrent : Architecture::Transformer, kind.size};
  return train_baseline(bk, subset.labeled, base, data.vocab, data.bank, seed);
}

inline SweepCell run_cell(const SweepKind& kind, std::size_t labeled_size, std::uint64_t seed, const SweepData& data,
                          const TrainConfig& base) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train_cell(kind, labeled_size, seed, data, base);
  SweepCell cell;
  cell.kind = kind;
  cell.labeled_size = labeled_size;
  cell.seed = seed;
  cell.report = evaluate_model(r.model, r.vocab, data.test, data.bank, r.config.model.p_th);
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

// Grid of |kinds| x |sizes| x |seeds| cells in that nesting order. Cells for
// which `done` returns a report are not retrained; `on_cell` sees every
// freshly trained cell.
inline std::vector<SweepCell> sweep(const std::vector<SweepKind>& kinds, const std::vector<std::size_t>& sizes,
                                    const std::vector<std::uint64_t>& seeds, const SweepData& data,
                                    const TrainConfig& base,
                                    const std::function<std::optional<SweepCell>(const SweepCell&)>& done = {},
                                    const std::function<void(const SweepCell&)>& on_cell = {}) {
  for (std::size_t n : sizes)
    if (n > data.train.size())
      throw ValidationError("labeled size " + std::to_string(n) + " exceeds the " + std::to_string(data.train.size()) +
                            " training sentences");
  std::vector<SweepCell> out;
  for (const auto& kind : kinds)
    for (std::size_t n : sizes)
      for (std::uint64_t seed : seeds) {
        SweepCell probe;
        probe.kind = kind;
        probe.labeled_size = n;
        probe.seed = seed;
        if (done) {
          if (auto prev = done(probe)) {
            out.push_back(std::move(*prev));
            continue;
          }
        }
        out.push_back(run_cell(kind, n, seed, data, base));
        if (on_cell) on_cell(out.back());
      }
  return out;
}

}  // namespace samie

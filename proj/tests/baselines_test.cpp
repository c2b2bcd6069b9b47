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
#include <map>

#include "samie/baselines.hpp"
#include "samie/manifest.hpp"
#include "samie/plot.hpp"
#include "samie/synthetic.hpp"

namespace samie {
namespace {

struct Toy {
  QuestionBank bank = default_atis_bank();
  std::vector<AnnotatedSentence> corpus = toy_corpus();
  Vocabulary vocab = build_vocabulary(corpus, bank);
  std::vector<Triplet> triplets;
  std::vector<SAPair> pairs;

  Toy() {
    Rng rng(4);
    for (const auto& s : corpus) {
      for (auto& t : make_triplets(s, bank, rng)) triplets.push_back(std::move(t));
      for (auto& p : make_sa_pairs(s)) pairs.push_back(std::move(p));
    }
  }

  TrainConfig config(Preset p, long steps) const {
    TrainConfig c;
    c.model = ModelConfig::from_preset(p);
    c.model.max_len = 16;
    c.optimizer.steps = steps;
    c.optimizer.labeled_batch = 8;
    c.optimizer.unlabeled_batch = 8;
    return c;
  }
};

TEST(Baseline, TransformerHasSamieParameterCount) {
  Toy t;
  for (Preset p : {Preset::Small, Preset::Regular}) {
    TrainConfig c = t.config(p, 1);
    c.model.vocab_size = static_cast<int>(t.vocab.size());
    const DualModel samie(c.model, 1);
    const TrainResult b = train_baseline({Architecture::Transformer, p}, t.triplets, c, t.vocab, t.bank, 1);
    EXPECT_EQ(b.model.parameters().scalar_count(), samie.parameters().scalar_count()) << to_string(p);
    EXPECT_EQ(b.model.parameters().size(), samie.parameters().size());
    for (std::size_t i = 0; i < samie.parameters().size(); ++i)
      EXPECT_EQ(b.model.parameters()[i].name, samie.parameters()[i].name);
  }
}

TEST(Baseline, UsesRequestedPresetAndArchitecture) {
  Toy t;
  const TrainConfig c = t.config(Preset::Small, 1);
  const TrainResult r = train_baseline({Architecture::Recurrent, Preset::Regular}, t.triplets, c, t.vocab, t.bank, 1);
  EXPECT_EQ(r.model.config().architecture, Architecture::Recurrent);
  EXPECT_EQ(r.model.config().d_model, ModelConfig::from_preset(Preset::Regular).d_model);
  EXPECT_EQ(r.model.config().max_len, 16);
  EXPECT_EQ(r.config.schedule.lambda_start, 0.0);
  EXPECT_EQ(r.config.schedule.lambda_end, 0.0);
}

TEST(Baseline, EqualsLambdaZeroSamieStepForStep) {
  Toy t;
  TrainConfig c = t.config(Preset::Regular, 4);
  const TrainResult base = train_baseline({Architecture::Transformer, Preset::Regular}, t.triplets, c, t.vocab, t.bank, 9);
  c.schedule = {0.0, 0.0, 0};
  const TrainResult empty = train(c, t.vocab, t.triplets, {}, t.bank, 9);
  const TrainResult with_pairs = train(c, t.vocab, t.triplets, t.pairs, t.bank, 9);
  ASSERT_EQ(base.history.size(), 4u);
  for (const TrainResult* other : {&empty, &with_pairs}) {
    ASSERT_EQ(other->history.size(), base.history.size());
    for (std::size_t i = 0; i < base.history.size(); ++i) {
      EXPECT_EQ(other->history[i].total, base.history[i].total) << i;
      EXPECT_EQ(other->history[i].loss_s_Q, base.history[i].loss_s_Q) << i;
      EXPECT_EQ(other->history[i].loss_s_A, base.history[i].loss_s_A) << i;
    }
    for (std::size_t i = 0; i < base.model.parameters().size(); ++i)
      EXPECT_TRUE(other->model.parameters()[i].value == base.model.parameters()[i].value);
  }
}

TEST(Baseline, RejectsEmptyLabeledSet) {
  Toy t;
  EXPECT_THROW(train_baseline({}, {}, t.config(Preset::Small, 1), t.vocab, t.bank, 1), ValidationError);
}

TEST(Baseline, RecurrentTrainsAndEvaluates) {
  Toy t;
  TrainConfig c = t.config(Preset::Small, 150);
  const TrainResult r = train_baseline({Architecture::Recurrent, Preset::Small}, t.triplets, c, t.vocab, t.bank, 2);
  EXPECT_LT(r.history.back().total, 0.5 * r.history.front().total);
  const ExperimentReport rep = evaluate_model(r.model, r.vocab, t.corpus, t.bank, 0.5);
  EXPECT_EQ(rep.qs_instances, t.triplets.size());
  EXPECT_GT(rep.qs_accuracy, 1.0 / 7.0);
}

TEST(Clustering, RequiresPairsAndPinsLambdaToOne) {
  Toy t;
  EXPECT_THROW(train_clustering(t.config(Preset::Small, 1), t.vocab, {}, t.bank, 1), ValidationError);
  const TrainResult r = train_clustering(t.config(Preset::Small, 3), t.vocab, t.pairs, t.bank, 1);
  for (const auto& h : r.history) {
    EXPECT_EQ(h.lambda, 1.0);
    EXPECT_EQ(h.total, h.loss_u);
  }
}

TEST(SweepKind, Parse) {
  EXPECT_EQ(parse_sweep_kind("samie").name, "samie");
  EXPECT_EQ(parse_sweep_kind("samie").size, Preset::Regular);
  EXPECT_EQ(parse_sweep_kind("transformer-small").size, Preset::Small);
  EXPECT_EQ(parse_sweep_kind("bilstm-regular").name, "bilstm");
  EXPECT_EQ(parse_sweep_kind("bilstm-small").label(), "bilstm-small");
  EXPECT_THROW(parse_sweep_kind("cnn"), ValidationError);
  EXPECT_THROW(parse_sweep_kind("samie-huge"), ValidationError);
}

SweepData toy_sweep_data() {
  SweepData d;
  d.bank = default_atis_bank();
  d.train = toy_corpus();
  d.test = d.train;
  d.vocab = build_vocabulary(d.train, d.bank);
  return d;
}

TrainConfig tiny_sweep_config(long steps) {
  TrainConfig c;
  c.model.max_len = 16;
  c.optimizer.steps = steps;
  c.optimizer.labeled_batch = 4;
  c.optimizer.unlabeled_batch = 4;
  return c;
}

TEST(Sweep, SingleCell) {
  const SweepData d = toy_sweep_data();
  const auto cells = sweep({parse_sweep_kind("transformer-small")}, {4}, {1}, d, tiny_sweep_config(2));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].key(), "transformer-small_n4_s1");
  EXPECT_GT(cells[0].report.qs_instances, 0u);
}

TEST(Sweep, GridShapeOrderAndResume) {
  const SweepData d = toy_sweep_data();
  const std::vector<SweepKind> kinds = {parse_sweep_kind("samie-small"), parse_sweep_kind("transformer-small")};
  std::vector<std::string> fresh;
  const auto cells = sweep(kinds, {2, 6}, {1, 2}, d, tiny_sweep_config(2), {},
                           [&](const SweepCell& c) { fresh.push_back(c.key()); });
  ASSERT_EQ(cells.size(), 2u * 2u * 2u);
  EXPECT_EQ(fresh.size(), cells.size());
  EXPECT_EQ(cells.front().key(), "samie-small_n2_s1");
  EXPECT_EQ(cells[1].key(), "samie-small_n2_s2");
  EXPECT_EQ(cells[2].key(), "samie-small_n6_s1");
  EXPECT_EQ(cells.back().key(), "transformer-small_n6_s2");

  // Resume: completed cells are handed back and not retrained.
  std::map<std::string, SweepCell> done;
  for (std::size_t i = 0; i < 5; ++i) done[cells[i].key()] = cells[i];
  fresh.clear();
  const auto resumed = sweep(
      kinds, {2, 6}, {1, 2}, d, tiny_sweep_config(2),
      [&](const SweepCell& probe) -> std::optional<SweepCell> {
        auto it = done.find(probe.key());
        if (it == done.end()) return std::nullopt;
        return it->second;
      },
      [&](const SweepCell& c) { fresh.push_back(c.key()); });
  ASSERT_EQ(resumed.size(), cells.size());
  EXPECT_EQ(fresh.size(), 3u);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(resumed[i].key(), cells[i].key());
    // Training is deterministic, so retrained cells agree with the first pass.
    EXPECT_EQ(resumed[i].report.to_json(), cells[i].report.to_json());
  }
}

TEST(Sweep, RejectsSizesBeyondTrainingSet) {
  const SweepData d = toy_sweep_data();
  EXPECT_THROW(sweep({parse_sweep_kind("samie")}, {11}, {1}, d, tiny_sweep_config(1)), ValidationError);
}

TEST(Sweep, ZeroLabeledSamieCellClusters) {
  const SweepData d = toy_sweep_data();
  const auto cells = sweep({parse_sweep_kind("samie-small")}, {0}, {1}, d, tiny_sweep_config(2));
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].report.confusion.total(), static_cast<long>(cells[0].report.qs_instances));
}

// QS accuracy grows with the labeled set on a small synthetic grammar
// (median of three seeds per size).
TEST(Sweep, ToyCurveIsMonotone) {
  SweepData d;
  d.bank = default_atis_bank();
  SlotGrammarOptions opt;
  opt.sentences = 300;
  const auto corpus = generate_flight_corpus(opt, 17);
  auto [train, test] = split_dataset(corpus, 0.15, 3);
  d.train = std::move(train);
  d.test = std::move(test);
  d.vocab = build_vocabulary(d.train, d.bank);
  TrainConfig base;
  base.model.max_len = 40;
  base.optimizer.steps = 120;
  base.optimizer.labeled_batch = 16;
  base.optimizer.unlabeled_batch = 16;
  const std::vector<std::size_t> sizes = {4, 128};
  const auto cells = sweep({parse_sweep_kind("transformer-small")}, sizes, {1, 2, 3}, d, base);
  std::vector<double> medians;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    std::vector<double> acc;
    for (std::size_t k = 0; k < 3; ++k) acc.push_back(cells[s * 3 + k].report.qs_accuracy);
    std::sort(acc.begin(), acc.end());
    medians.push_back(acc[1]);
  }
  EXPECT_GE(medians[1], medians[0]);
}

TEST(Plot, CurvesSvg) {
  const std::string svg = svg_curves("QS <accuracy>", "accuracy",
                                     {{"samie-regular", {{64, 0.5}, {512, 0.8}}}, {"transformer", {{64, 0.4}}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("samie-regular"), std::string::npos);
  EXPECT_NE(svg.find("QS &lt;accuracy&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("QS <accuracy>"), std::string::npos);
}

TEST(Plot, HeatmapSvg) {
  const ConfusionMatrix m = confusion_matrix({0, 1, 1, 0}, {0, 1, 0, 0}, 2);
  const std::string svg = svg_heatmap("confusion", m, {"fromloc", "toloc"}, {"c0", "c1"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("fromloc"), std::string::npos);
  EXPECT_NE(svg.find("c1"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Manifest, JsonRoundTrip) {
  ExperimentManifest m;
  m.corpus = "train.jsonl";
  m.test = "test.jsonl";
  m.bank = "bank.json";
  m.split_seed = 11;
  m.seed = 5;
  m.labeled_size = 64;
  m.config.model = ModelConfig::from_preset(Preset::Small);
  m.config.schedule = {0.2, 0.7, 40};
  m.config.optimizer.steps = 123;
  m.output_dir = "out";
  EXPECT_EQ(manifest_from_json(nlohmann::json::parse(to_json(m).dump())), m);

  const auto path = std::filesystem::temp_directory_path() / "samie_manifest_test.json";
  save_manifest(path.string(), m);
  EXPECT_EQ(load_manifest(path.string()), m);
  std::filesystem::remove(path);
}

TEST(Manifest, Rejections) {
  EXPECT_THROW(manifest_from_json(nlohmann::json::parse(R"({"corpus":"a","colour":1})")), ValidationError);
  EXPECT_THROW(manifest_from_json(nlohmann::json::parse(R"({"labeled_size":-1})")), ValidationError);
  EXPECT_THROW(manifest_from_json(nlohmann::json::parse(R"([1,2])")), ValidationError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), ValidationError);
}

}  // namespace
}  // namespace samie

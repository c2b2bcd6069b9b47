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

// samie: prepare | train | eval | cluster | sweep | report | synth
//
// Exit status 0 on success, 1 on invalid input or configuration, 2 on
// runtime failure (including divergence).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "samie/baselines.hpp"
#include "samie/checkpoint.hpp"
#include "samie/corpus.hpp"
#include "samie/evaluation.hpp"
#include "samie/manifest.hpp"
#include "samie/plot.hpp"
#include "samie/synthetic.hpp"
#include "samie/training.hpp"
#include "samie/vocab.hpp"

namespace fs = std::filesystem;
using namespace samie;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  // Write-then-rename so an interrupted run never leaves a truncated file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError(what + " is required");
  if (!fs::exists(path)) throw ValidationError(what + " " + path + " does not exist");
}

// Flags shared by the commands that train.
struct TrainFlags {
  std::string manifest;
  std::string data;
  std::string config;
  std::uint64_t seed = 1;
  long labeled_size = 512;
  std::string preset = "regular";
  std::string architecture = "transformer";
  double k = 4.0;
  double p_th = 0.5;
  double lambda_start = 0.1;
  double lambda_end = 0.9;
  long ramp_steps = -1;
  long steps = 1000;
  double lr = 1e-3;
  int batch = 32;
  std::string out;
};

struct TrainOptionHandles {
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

TrainOptionHandles add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_labeled) {
  TrainOptionHandles h;
  h.opts["manifest"] = cmd->add_option("--manifest", f.manifest, "Re-run a stored manifest (flags override it)");
  h.opts["data"] = cmd->add_option("--data", f.data, "Directory written by 'prepare'");
  h.opts["config"] = cmd->add_option("--config", f.config, "Training config JSON");
  h.opts["seed"] = cmd->add_option("--seed", f.seed, "Run seed");
  if (with_labeled) h.opts["labeled-size"] = cmd->add_option("--labeled-size", f.labeled_size, "Labeled sentences");
  h.opts["preset"] = cmd->add_option("--preset", f.preset, "small | regular")->check(CLI::IsMember({"small", "regular"}));
  h.opts["arch"] = cmd->add_option("--arch", f.architecture, "transformer | recurrent")
                       ->check(CLI::IsMember({"transformer", "recurrent", "bilstm"}));
  h.opts["k"] = cmd->add_option("--k", f.k, "Question-score temperature (>= 1)");
  h.opts["p-th"] = cmd->add_option("--p-th", f.p_th, "Selection threshold");
  h.opts["lambda-start"] = cmd->add_option("--lambda-start", f.lambda_start);
  h.opts["lambda-end"] = cmd->add_option("--lambda-end", f.lambda_end);
  h.opts["ramp-steps"] = cmd->add_option("--ramp-steps", f.ramp_steps, "-1 = 30% of steps");
  h.opts["steps"] = cmd->add_option("--steps", f.steps);
  h.opts["lr"] = cmd->add_option("--lr", f.lr, "Adam learning rate");
  h.opts["batch"] = cmd->add_option("--batch", f.batch, "Labeled and unlabeled batch size");
  h.opts["out"] = cmd->add_option("--out", f.out, "Output directory");
  return h;
}

// Manifest from (stored manifest) <- (config file) <- (explicit flags).
ExperimentManifest resolve_manifest(const TrainFlags& f, const TrainOptionHandles& h) {
  ExperimentManifest m;
  if (!f.manifest.empty()) m = load_manifest(f.manifest);
  if (!f.config.empty()) m.config = load_train_config(f.config);
  const bool fresh = f.manifest.empty();
  if (fresh || h.given("data")) {
    if (f.data.empty()) throw ValidationError("--data or --manifest is required");
    const fs::path d(f.data);
    m.corpus = (d / "train.jsonl").string();
    m.test = (d / "test.jsonl").string();
    m.bank = (d / "bank.json").string();
    const fs::path prep = d / "manifest.json";
    if (fs::exists(prep)) {
      const auto j = read_json(prep);
      if (j.contains("split_seed")) m.split_seed = j["split_seed"].get<std::uint64_t>();
    }
  }
  auto use = [&](const std::string& name) { return (fresh && f.config.empty()) || h.given(name); };
  if (fresh || h.given("seed")) m.seed = f.seed;
  if (fresh || h.given("labeled-size")) m.labeled_size = f.labeled_size;
  if (use("preset")) {
    const ModelConfig prev = m.config.model;
    m.config.model = ModelConfig::from_preset(parse_preset(f.preset));
    m.config.model.architecture = prev.architecture;
    m.config.model.k = prev.k;
    m.config.model.p_th = prev.p_th;
    m.config.model.max_len = prev.max_len;
  }
  if (use("arch")) m.config.model.architecture = parse_architecture(f.architecture);
  if (use("k")) m.config.model.k = f.k;
  if (use("p-th")) m.config.model.p_th = f.p_th;
  if (use("lambda-start")) m.config.schedule.lambda_start = f.lambda_start;
  if (use("lambda-end")) m.config.schedule.lambda_end = f.lambda_end;
  if (use("ramp-steps")) m.config.schedule.ramp_steps = f.ramp_steps;
  if (use("steps")) m.config.optimizer.steps = f.steps;
  if (use("lr")) m.config.optimizer.learning_rate = f.lr;
  if (use("batch")) m.config.optimizer.labeled_batch = m.config.optimizer.unlabeled_batch = f.batch;
  // A start above the end is clipped so "--lambda-end 0" alone means lambda = 0.
  if (m.config.schedule.lambda_start > m.config.schedule.lambda_end)
    m.config.schedule.lambda_start = m.config.schedule.lambda_end;
  if (fresh || h.given("out")) m.output_dir = f.out;
  if (m.output_dir.empty()) throw ValidationError("--out is required");
  require_file(m.corpus, "training corpus");
  require_file(m.bank, "question bank");
  m.config.model.vocab_size = 2;  // resolved from the data at training time
  m.config.validate();
  return m;
}

// ---------------------------------------------------------------------------

struct PrepareFlags {
  std::string input;
  std::string format = "auto";
  std::string bank;
  std::uint64_t split_seed = 1;
  double test_fraction = 0.15;
  std::string out;
};

int cmd_prepare(const PrepareFlags& f) {
  require_file(f.input, "input");
  require_file(f.bank, "question bank");
  if (f.out.empty()) throw ValidationError("--out is required");
  const QuestionBank bank = load_question_bank(f.bank);
  std::string format = f.format;
  if (format == "auto") {
    const std::string ext = fs::path(f.input).extension().string();
    format = ext == ".jsonl" || ext == ".json" ? "jsonl" : "bio";
  }
  std::vector<AnnotatedSentence> raw;
  if (format == "jsonl") {
    raw = load_slot_corpus(f.input);
  } else {
    std::ifstream in(f.input);
    if (!in) throw ValidationError("cannot open " + f.input);
    raw = read_bio(in, f.input, fs::path(f.input).stem().string() + "-");
  }
  FilterReport filter;
  const std::vector<AnnotatedSentence> corpus = filter_for_bank(raw, bank, &filter);
  if (corpus.size() < 2) throw ValidationError("fewer than two usable sentences after filtering");
  const DatasetSplit split = split_dataset(corpus, f.test_fraction, f.split_seed);

  fs::create_directories(f.out);
  const fs::path out(f.out);
  auto corpus_text = [](const std::vector<AnnotatedSentence>& c) {
    std::ostringstream s;
    write_slot_corpus(s, c);
    return s.str();
  };
  write_text(out / "corpus.jsonl", corpus_text(corpus));
  write_text(out / "train.jsonl", corpus_text(split.train));
  write_text(out / "test.jsonl", corpus_text(split.test));
  write_text(out / "bank.json", dump(bank.to_json()));

  auto ids = [](const std::vector<AnnotatedSentence>& c) {
    std::vector<std::string> v;
    for (const auto& s : c) v.push_back(s.id);
    return v;
  };
  write_text(out / "split.json", dump({{"split_seed", f.split_seed},
                                       {"test_fraction", f.test_fraction},
                                       {"train", ids(split.train)},
                                       {"test", ids(split.test)}}));

  auto count = [](const std::vector<AnnotatedSentence>& c) {
    std::size_t slots = 0;
    for (const auto& s : c) slots += s.slots.size();
    return slots;
  };
  nlohmann::ordered_json per_category = nlohmann::ordered_json::object();
  for (const auto& cat : bank.categories()) per_category[cat] = 0;
  for (const auto& s : corpus)
    for (const auto& slot : s.slots) per_category[slot.category] = per_category[slot.category].get<long>() + 1;
  const nlohmann::ordered_json summary = {
      {"input_sentences", raw.size()},
      {"kept_sentences", corpus.size()},
      {"dropped_sentences", filter.dropped.size()},
      {"dropped", filter.dropped},
      {"triplets", count(corpus)},
      {"pairs", count(corpus)},
      {"train_sentences", split.train.size()},
      {"test_sentences", split.test.size()},
      {"train_triplets", count(split.train)},
      {"test_triplets", count(split.test)},
      {"per_category", per_category}};
  write_text(out / "summary.json", dump(summary));
  write_text(out / "manifest.json", dump({{"command", "prepare"},
                                          {"input", f.input},
                                          {"format", format},
                                          {"bank", f.bank},
                                          {"split_seed", f.split_seed},
                                          {"test_fraction", f.test_fraction},
                                          {"output_dir", f.out}}));
  std::cout << "sentences " << corpus.size() << " (dropped " << filter.dropped.size() << "), triplets "
            << count(corpus) << ", pairs " << count(corpus) << ", train " << split.train.size() << ", test "
            << split.test.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct RunData {
  std::vector<AnnotatedSentence> train;
  std::vector<AnnotatedSentence> test;
  QuestionBank bank;
  Vocabulary vocab;
};

RunData load_run_data(const ExperimentManifest& m) {
  RunData d;
  d.bank = load_question_bank(m.bank);
  d.train = load_slot_corpus(m.corpus);
  if (!m.test.empty() && fs::exists(m.test)) d.test = load_slot_corpus(m.test);
  d.vocab = build_vocabulary(d.train, d.bank);
  return d;
}

void write_report_files(const fs::path& dir, const ExperimentReport& r, const std::string& title) {
  write_text(dir / "report.json", dump(r.to_json()));
  write_text(dir / "confusion.svg", svg_heatmap(title, r.confusion, r.categories, r.categories));
}

// Trains according to the manifest; writes checkpoint, metric log and
// manifest. Returns the trained result.
TrainResult run_training(const ExperimentManifest& m, const RunData& d, bool clustering) {
  fs::create_directories(m.output_dir);
  const fs::path out(m.output_dir);
  save_manifest((out / "manifest.json").string(), m);
  std::ofstream log(out / "metrics.jsonl");
  TrainOptions opt;
  opt.on_step = [&log](const LossBreakdown& b) { log << to_json(b).dump() << '\n'; };
  TrainResult r = [&] {
    if (clustering) {
      std::vector<SAPair> pairs;
      for (const auto& s : d.train) {
        auto p = make_sa_pairs(s);
        pairs.insert(pairs.end(), p.begin(), p.end());
      }
      return train_clustering(m.config, d.vocab, pairs, d.bank, m.seed, opt);
    }
    const LabeledSubset sub =
        sample_labeled_subset(d.train, static_cast<std::size_t>(m.labeled_size), d.bank, m.seed);
    if (sub.labeled.empty()) throw ValidationError("labeled size 0: use 'cluster' for training without labels");
    return train(m.config, d.vocab, sub.labeled, sub.unlabeled, d.bank, m.seed, opt);
  }();
  save_checkpoint((out / "model.ckpt").string(), r.model, r.config, r.vocab, d.bank);
  return r;
}

int cmd_train(const ExperimentManifest& m) {
  const RunData d = load_run_data(m);
  TrainResult r = run_training(m, d, false);
  const auto& last = r.history.back();
  std::cout << "trained " << r.history.size() << " steps; final total " << last.total << " (loss_s_Q "
            << last.loss_s_Q << ", loss_s_A " << last.loss_s_A << ", loss_u " << last.loss_u << ")\n";
  if (!d.test.empty()) {
    const ExperimentReport rep = evaluate_model(r.model, r.vocab, d.test, d.bank, r.config.model.p_th);
    write_report_files(m.output_dir, rep, "question selection confusion");
    std::cout << "test QS accuracy " << rep.qs_accuracy << ", AE F1 " << rep.ae.f1 << "\n";
  }
  return 0;
}

struct EvalFlags {
  std::string checkpoint;
  std::string test;
  std::string bank;
  std::optional<double> p_th;
  std::string out;
};

int cmd_eval(const EvalFlags& f) {
  require_file(f.checkpoint, "checkpoint");
  require_file(f.test, "test set");
  if (f.out.empty()) throw ValidationError("--out is required");
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const QuestionBank bank = f.bank.empty() ? ckpt.bank : load_question_bank(f.bank);
  const auto test = load_slot_corpus(f.test);
  const double p_th = f.p_th.value_or(ckpt.config.model.p_th);
  const ExperimentReport r = evaluate_checkpoint(ckpt, test, bank, p_th);
  fs::create_directories(f.out);
  write_report_files(f.out, r, "question selection confusion");
  write_text(fs::path(f.out) / "manifest.json", dump({{"command", "eval"},
                                                      {"checkpoint", f.checkpoint},
                                                      {"test", f.test},
                                                      {"bank", f.bank.empty() ? "<checkpoint>" : f.bank},
                                                      {"p_th", p_th},
                                                      {"output_dir", f.out}}));
  std::cout << "QS accuracy " << r.qs_accuracy << "; AE P " << r.ae.precision << " R " << r.ae.recall << " F1 "
            << r.ae.f1 << "\n";
  return 0;
}

int cmd_cluster(ExperimentManifest m) {
  m.labeled_size = 0;
  const RunData d = load_run_data(m);
  TrainResult r = run_training(m, d, true);
  const auto& eval_set = d.test.empty() ? d.train : d.test;
  const ExperimentReport rep = evaluate_model(r.model, r.vocab, eval_set, d.bank, r.config.model.p_th);
  const fs::path out(m.output_dir);
  const ConfusionMatrix aligned = permute_columns(rep.confusion, rep.alignment.permutation);
  std::vector<std::string> aligned_cols;
  for (int c : rep.alignment.permutation) aligned_cols.push_back("cluster " + std::to_string(c));
  std::vector<std::string> raw_cols;
  for (std::size_t c = 0; c < rep.categories.size(); ++c) raw_cols.push_back("cluster " + std::to_string(c));
  nlohmann::ordered_json spread = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < rep.categories.size(); ++g)
    spread[rep.categories[g]] = columns_covering(rep.confusion, g, 0.7);
  write_text(out / "cluster.json", dump({{"categories", rep.categories},
                                         {"raw_confusion", rep.confusion.to_json()},
                                         {"raw_accuracy", rep.qs_accuracy},
                                         {"permutation", rep.alignment.permutation},
                                         {"aligned_confusion", aligned.to_json()},
                                         {"aligned_accuracy", rep.alignment.accuracy},
                                         {"clusters_for_70_percent", spread}}));
  write_text(out / "confusion_raw.svg", svg_heatmap("confusion without labels", rep.confusion, rep.categories, raw_cols));
  write_text(out / "confusion_aligned.svg",
             svg_heatmap("confusion without labels (aligned)", aligned, rep.categories, aligned_cols));
  std::cout << "raw accuracy " << rep.qs_accuracy << ", aligned accuracy " << rep.alignment.accuracy << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Sweeps

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Tables and one curve per metric from the cell files in dir/cells.
int emit_sweep_report(const fs::path& dir) {
  const fs::path cells_dir = dir / "cells";
  if (!fs::exists(cells_dir)) throw ValidationError("no cells directory under " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(cells_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  // kind label -> size -> metric -> values over seeds
  std::map<std::string, std::map<long, std::map<std::string, std::vector<double>>>> grid;
  std::ostringstream csv;
  csv << "kind,size,labeled_size,seed,qs_accuracy,ae_precision,ae_recall,ae_f1,aligned_accuracy,seconds\n";
  for (const auto& file : files) {
    const auto j = read_json(file);
    const std::string label = j["kind"].get<std::string>() + "-" + j["size"].get<std::string>();
    const long n = j["labeled_size"].get<long>();
    const auto& r = j["report"];
    const double qs = r["qs"]["accuracy"], p = r["ae"]["precision"], rc = r["ae"]["recall"], f1 = r["ae"]["f1"];
    auto& m = grid[label][n];
    m["qs_accuracy"].push_back(qs);
    m["ae_precision"].push_back(p);
    m["ae_recall"].push_back(rc);
    m["ae_f1"].push_back(f1);
    csv << j["kind"].get<std::string>() << ',' << j["size"].get<std::string>() << ',' << n << ','
        << j["seed"].get<std::uint64_t>() << ',' << qs << ',' << p << ',' << rc << ',' << f1 << ','
        << r["alignment"]["accuracy"].get<double>() << ',' << j["seconds"].get<double>() << '\n';
  }
  write_text(dir / "cells.csv", csv.str());

  const std::vector<std::pair<std::string, std::string>> metrics = {{"qs_accuracy", "ACC - question selection"},
                                                                    {"ae_precision", "P - answer extraction"},
                                                                    {"ae_recall", "R - answer extraction"},
                                                                    {"ae_f1", "F1 - answer extraction"}};
  std::ostringstream table;
  table << "kind,labeled_size,seeds";
  for (const auto& [key, _] : metrics) table << ",median_" << key;
  table << '\n';
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [label, sizes] : grid)
    for (const auto& [n, m] : sizes) {
      table << label << ',' << n << ',' << m.at("qs_accuracy").size();
      for (const auto& [key, _] : metrics) {
        table << ',' << median(m.at(key));
        summary[label][std::to_string(n)][key] = median(m.at(key));
      }
      table << '\n';
    }
  write_text(dir / "medians.csv", table.str());
  write_text(dir / "summary.json", dump(summary));
  for (const auto& [key, title] : metrics) {
    std::vector<CurveSeries> series;
    for (const auto& [label, sizes] : grid) {
      CurveSeries s{label, {}};
      for (const auto& [n, m] : sizes) s.points.emplace_back(static_cast<double>(n), median(m.at(key)));
      series.push_back(std::move(s));
    }
    write_text(dir / (key + ".svg"), svg_curves(title, key, series));
  }
  std::cout << table.str();
  return 0;
}

struct SweepFlags {
  std::string kinds = "samie-regular,transformer-regular";
  std::string sizes = "64,128,256,512,1024,2048";
  std::string seeds = "1,2,3";
};

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        out.push_back(item);
      } else {
        std::size_t used = 0;
        const auto v = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(static_cast<T>(v));
      }
    } catch (const std::logic_error&) {
      throw ValidationError("bad " + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(what + " list is empty");
  return out;
}

int cmd_sweep(const ExperimentManifest& m, const SweepFlags& f) {
  std::vector<SweepKind> kinds;
  for (const auto& k : parse_list<std::string>(f.kinds, "kinds")) kinds.push_back(parse_sweep_kind(k));
  const auto sizes = parse_list<std::size_t>(f.sizes, "sizes");
  const auto seeds = parse_list<std::uint64_t>(f.seeds, "seeds");
  const RunData rd = load_run_data(m);
  if (rd.test.empty()) throw ValidationError("sweep needs a test split");
  const SweepData data{rd.train, rd.test, rd.bank, rd.vocab};
  const fs::path out(m.output_dir);
  fs::create_directories(out / "cells");
  save_manifest((out / "manifest.json").string(), m);
  write_text(out / "grid.json", dump({{"kinds", parse_list<std::string>(f.kinds, "kinds")},
                                      {"sizes", sizes},
                                      {"seeds", seeds}}));

  int failures = 0;
  for (const auto& kind : kinds)
    for (std::size_t n : sizes)
      for (std::uint64_t seed : seeds) {
        SweepCell probe;
        probe.kind = kind;
        probe.labeled_size = n;
        probe.seed = seed;
        const fs::path cell_file = out / "cells" / (probe.key() + ".json");
        if (fs::exists(cell_file)) {
          std::cout << "skip " << probe.key() << " (done)\n";
          continue;
        }
        try {
          const SweepCell cell = sweep({kind}, {n}, {seed}, data, m.config).front();
          write_text(cell_file, dump(to_json(cell)));
          std::cout << cell.key() << ": QS " << cell.report.qs_accuracy << ", AE F1 " << cell.report.ae.f1 << " ("
                    << cell.seconds << " s)\n";
        } catch (const std::exception& e) {
          ++failures;
          std::cerr << "cell " << probe.key() << " failed: " << e.what() << "\n";
        }
      }
  emit_sweep_report(out);
  return failures == 0 ? 0 : 2;
}

int cmd_report(const std::string& dir) {
  const fs::path d(dir);
  if (fs::exists(d / "cells")) return emit_sweep_report(d);
  if (fs::exists(d / "report.json")) {
    const auto j = read_json(d / "report.json");
    const auto cats = j["categories"].get<std::vector<std::string>>();
    ConfusionMatrix m(cats.size());
    for (std::size_t g = 0; g < cats.size(); ++g)
      for (std::size_t p = 0; p < cats.size(); ++p) m.at(g, p) = j["confusion"][g][p].get<long>();
    write_text(d / "confusion.svg", svg_heatmap("question selection confusion", m, cats, cats));
    std::cout << "QS accuracy " << j["qs"]["accuracy"].get<double>() << ", AE F1 " << j["ae"]["f1"].get<double>()
              << "\n";
    return 0;
  }
  throw ValidationError(dir + " holds neither a sweep nor a report");
}

struct SynthFlags {
  std::size_t sentences = 3000;
  std::uint64_t seed = 2026;
  std::string out;
  std::string bank_out;
};

int cmd_synth(const SynthFlags& f) {
  if (f.out.empty()) throw ValidationError("--out is required");
  SlotGrammarOptions opt;
  opt.sentences = f.sentences;
  save_slot_corpus(f.out, generate_flight_corpus(opt, f.seed));
  if (!f.bank_out.empty()) write_text(f.bank_out, dump(default_atis_bank().to_json()));
  std::cout << "wrote " << f.sentences << " sentences to " << f.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised question selection and answer extraction"};
  app.require_subcommand(1);

  PrepareFlags pf;
  auto* prepare = app.add_subcommand("prepare", "Convert and split an annotated corpus");
  prepare->add_option("--input", pf.input, "BIO file or JSON-lines corpus")->required();
  prepare->add_option("--format", pf.format)->check(CLI::IsMember({"auto", "bio", "jsonl"}));
  prepare->add_option("--bank", pf.bank, "Question bank JSON")->required();
  prepare->add_option("--seed,--split-seed", pf.split_seed, "Split seed");
  prepare->add_option("--test-fraction", pf.test_fraction);
  prepare->add_option("--out", pf.out)->required();

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Joint semi-supervised training");
  const auto th = add_train_flags(train_cmd, tf, true);

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", ef.checkpoint)->required();
  eval->add_option("--test", ef.test)->required();
  eval->add_option("--bank", ef.bank, "Defaults to the checkpoint's bank");
  double eval_pth = 0;
  auto* eval_pth_opt = eval->add_option("--p-th", eval_pth);
  eval->add_option("--out", ef.out)->required();

  TrainFlags cf;
  auto* cluster = app.add_subcommand("cluster", "Train without labels and report clusters");
  const auto ch = add_train_flags(cluster, cf, false);

  TrainFlags sf;
  SweepFlags sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Model kinds x labeled sizes x seeds");
  const auto sh = add_train_flags(sweep_cmd, sf, false);
  sweep_cmd->add_option("--kinds", sw.kinds, "e.g. samie-regular,transformer-small,bilstm-regular");
  sweep_cmd->add_option("--sizes", sw.sizes, "Labeled sentence counts");
  sweep_cmd->add_option("--seeds", sw.seeds);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Regenerate tables and figures");
  report->add_option("--dir", report_dir, "Sweep or evaluation directory")->required();

  SynthFlags yf;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic flight-query corpus");
  synth->add_option("--sentences", yf.sentences);
  synth->add_option("--seed", yf.seed);
  synth->add_option("--out", yf.out)->required();
  synth->add_option("--bank-out", yf.bank_out, "Also write the default question bank");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*prepare) return cmd_prepare(pf);
    if (*train_cmd) return cmd_train(resolve_manifest(tf, th));
    if (*eval) {
      if (eval_pth_opt->count() > 0) ef.p_th = eval_pth;
      return cmd_eval(ef);
    }
    if (*cluster) {
      if (!ch.given("lambda-start") && !ch.given("lambda-end")) cf.lambda_start = cf.lambda_end = 1.0;
      return cmd_cluster(resolve_manifest(cf, ch));
    }
    if (*sweep_cmd) return cmd_sweep(resolve_manifest(sf, sh), sw);
    if (*report) return cmd_report(report_dir);
    if (*synth) return cmd_synth(yf);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

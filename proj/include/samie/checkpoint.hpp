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


// Checkpoint container: a "samie-ckpt-v1" header line, one JSON line with
// the training config, vocabulary, question bank and tensor index, then the
// raw little-endian float64 tensor data in index order.

#pragma once

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "samie/config.hpp"
#include "samie/corpus.hpp"
#include "samie/error.hpp"
#include "samie/evaluation.hpp"
#include "samie/model.hpp"
#include "samie/vocab.hpp"

namespace samie {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

inline constexpr const char* kCheckpointHeader = "samie-ckpt-v1";

struct Checkpoint {
  TrainConfig config;
  Vocabulary vocab;
  QuestionBank bank;
  DualModel model;
};

inline void write_checkpoint(std::ostream& out, const DualModel& model, const TrainConfig& config,
                             const Vocabulary& vocab, const QuestionBank& bank) {
  if (static_cast<int>(vocab.size()) != model.config().vocab_size)
    throw ValidationError("vocabulary does not match the model");
  TrainConfig cfg = config;
  cfg.model = model.config();
  nlohmann::ordered_json meta;
  meta["config"] = to_json(cfg);
  meta["vocab"] = vocab.words();
  meta["bank"] = bank.to_json();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  const ParameterStore& store = model.parameters();
  for (std::size_t i = 0; i < store.size(); ++i)
    tensors.push_back({{"name", store[i].name}, {"rows", store[i].value.rows()}, {"cols", store[i].value.cols()}});
  meta["tensors"] = tensors;
  out << kCheckpointHeader << '\n' << meta.dump() << '\n';
  for (std::size_t i = 0; i < store.size(); ++i)
    out.write(reinterpret_cast<const char*>(store[i].value.data()),
              static_cast<std::streamsize>(store[i].value.size() * static_cast<Eigen::Index>(sizeof(Real))));
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

inline void save_checkpoint(const std::string& path, const DualModel& model, const TrainConfig& config,
                            const Vocabulary& vocab, const QuestionBank& bank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_checkpoint(out, model, config, vocab, bank);
}

inline Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>") {
  std::string header, meta_line;
  if (!std::getline(in, header) || header != kCheckpointHeader)
    throw ValidationError(source + ": not a " + std::string(kCheckpointHeader) + " checkpoint");
  if (!std::getline(in, meta_line)) throw ValidationError(source + ": truncated checkpoint");
  nlohmann::ordered_json meta;
  try {
    meta = nlohmann::ordered_json::parse(meta_line);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  if (!meta.contains("config") || !meta.contains("vocab") || !meta.contains("bank") || !meta.contains("tensors"))
    throw ValidationError(source + ": checkpoint metadata is incomplete");
  TrainConfig config = train_config_from_json(nlohmann::json(meta["config"]));
  Vocabulary vocab = Vocabulary::from_words(meta["vocab"].get<std::vector<std::string>>());
  QuestionBank bank = QuestionBank::from_json(meta["bank"]);
  if (static_cast<int>(vocab.size()) != config.model.vocab_size)
    throw ValidationError(source + ": vocabulary size disagrees with the model config");
  DualModel model(config.model, 0);
  ParameterStore& store = model.parameters();
  const auto& tensors = meta["tensors"];
  if (tensors.size() != store.size())
    throw ValidationError(source + ": expected " + std::to_string(store.size()) + " tensors, found " +
                          std::to_string(tensors.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& t = tensors[i];
    Parameter& p = store[i];
    if (t.at("name").get<std::string>() != p.name || t.at("rows").get<Eigen::Index>() != p.value.rows() ||
        t.at("cols").get<Eigen::Index>() != p.value.cols())
      throw ValidationError(source + ": tensor " + std::to_string(i) + " does not match " + p.name);
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(Real))));
    if (!in) throw ValidationError(source + ": truncated tensor data for " + p.name);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ValidationError(source + ": trailing bytes after tensors");
  return {std::move(config), std::move(vocab), std::move(bank), std::move(model)};
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  return read_checkpoint(in, path);
}

// Evaluation against the test bank; the checkpoint's own vocabulary must be
// the one the model was built with.
inline ExperimentReport evaluate_checkpoint(const Checkpoint& ckpt, const std::vector<AnnotatedSentence>& testset,
                                            const QuestionBank& bank, double p_th) {
  return evaluate_model(ckpt.model, ckpt.vocab, testset, bank, p_th);
}

}  // namespace samie

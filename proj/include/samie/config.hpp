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

#include <fstream>
#include <set>
#include <string>

#include "samie/error.hpp"

namespace samie {

enum class Preset { Small, Regular };
enum class Architecture { Transformer, Recurrent };

inline std::string to_string(Preset p) { return p == Preset::Small ? "small" : "regular"; }
inline std::string to_string(Architecture a) { return a == Architecture::Transformer ? "transformer" : "recurrent"; }

inline Preset parse_preset(const std::string& s) {
  if (s == "small" || s == "Small") return Preset::Small;
  if (s == "regular" || s == "Regular") return Preset::Regular;
  throw ValidationError("unknown preset " + s);
}

inline Architecture parse_architecture(const std::string& s) {
  if (s == "transformer") return Architecture::Transformer;
  if (s == "recurrent" || s == "bilstm") return Architecture::Recurrent;
  throw ValidationError("unknown architecture " + s);
}

struct ModelConfig {
  int vocab_size = 2;
  int d_model = 128;
  int n_layers = 2;
  int n_heads = 4;
  int ffn_dim = 256;
  int max_len = 64;
  double k = 4.0;     // temperature applied to question scores before the softmax
  double p_th = 0.5;  // selection / verification threshold
  Preset preset = Preset::Regular;
  Architecture architecture = Architecture::Transformer;

  static ModelConfig from_preset(Preset p) {
    ModelConfig c;
    c.preset = p;
    if (p == Preset::Small) {
      c.d_model = 32;
      c.n_layers = 1;
      c.n_heads = 2;
      c.ffn_dim = 64;
    }
    return c;
  }

  void validate() const {
    if (vocab_size < 2) throw ValidationError("vocab_size must be at least 2");
    if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0)
      throw ValidationError("d_model must be a positive multiple of n_heads");
    if (architecture == Architecture::Recurrent && d_model % 2 != 0)
      throw ValidationError("recurrent models need an even d_model");
    if (n_layers < 0 || ffn_dim < 1 || max_len < 1) throw ValidationError("invalid layer sizes");
    if (!(k >= 1.0)) throw ValidationError("k must be >= 1");
    if (!(p_th > 0.0 && p_th < 1.0)) throw ValidationError("p_th must lie in (0,1)");
  }

  bool operator==(const ModelConfig&) const = default;
};

struct ScheduleConfig {
  double lambda_start = 0.1;
  double lambda_end = 0.9;
  long ramp_steps = -1;  // -1: 30% of the optimizer's step count

  void validate() const {
    if (!(0.0 <= lambda_start && lambda_start <= lambda_end && lambda_end <= 1.0))
      throw ValidationError("schedule needs 0 <= lambda_start <= lambda_end <= 1");
    if (ramp_steps < -1) throw ValidationError("ramp_steps must be >= 0 (or -1 for automatic)");
  }

  bool operator==(const ScheduleConfig&) const = default;
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int labeled_batch = 32;
  int unlabeled_batch = 32;
  long steps = 1000;

  void validate() const {
    if (!(learning_rate > 0)) throw ValidationError("learning_rate must be positive");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ValidationError("betas must lie in [0,1)");
    if (labeled_batch < 1 || unlabeled_batch < 1) throw ValidationError("batch sizes must be positive");
    if (steps < 1) throw ValidationError("steps must be positive");
  }

  bool operator==(const OptimizerConfig&) const = default;
};

struct TrainConfig {
  ModelConfig model;
  ScheduleConfig schedule;
  OptimizerConfig optimizer;

  // Schedule with the automatic ramp length resolved.
  ScheduleConfig effective_schedule() const {
    ScheduleConfig s = schedule;
    if (s.ramp_steps < 0) s.ramp_steps = static_cast<long>(0.3 * static_cast<double>(optimizer.steps));
    return s;
  }

  void validate() const {
    model.validate();
    schedule.validate();
    optimizer.validate();
  }

  bool operator==(const TrainConfig&) const = default;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size}, {"d_model", c.d_model},   {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},       {"ffn_dim", c.ffn_dim},   {"max_len", c.max_len},
          {"k", c.k},                   {"p_th", c.p_th},         {"preset", to_string(c.preset)},
          {"architecture", to_string(c.architecture)}};
}

inline nlohmann::ordered_json to_json(const ScheduleConfig& s) {
  return {{"lambda_start", s.lambda_start}, {"lambda_end", s.lambda_end}, {"ramp_steps", s.ramp_steps}};
}

inline nlohmann::ordered_json to_json(const OptimizerConfig& o) {
  return {{"learning_rate", o.learning_rate}, {"beta1", o.beta1},
          {"beta2", o.beta2},                 {"epsilon", o.epsilon},
          {"labeled_batch", o.labeled_batch}, {"unlabeled_batch", o.unlabeled_batch},
          {"steps", o.steps}};
}

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
  return {{"model", to_json(c.model)}, {"schedule", to_json(c.schedule)}, {"optimizer", to_json(c.optimizer)}};
}

// Missing keys keep their defaults, except that a "preset" key first resets
// every size field to that preset. Unknown keys are rejected.
inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j,
                         {"vocab_size", "d_model", "n_layers", "n_heads", "ffn_dim", "max_len", "k", "p_th", "preset",
                          "architecture"},
                         "model");
  ModelConfig c;
  if (j.contains("preset")) c = ModelConfig::from_preset(parse_preset(j.at("preset").get<std::string>()));
  if (j.contains("architecture")) c.architecture = parse_architecture(j.at("architecture").get<std::string>());
  detail::read_if(j, "vocab_size", c.vocab_size);
  detail::read_if(j, "d_model", c.d_model);
  detail::read_if(j, "n_layers", c.n_layers);
  detail::read_if(j, "n_heads", c.n_heads);
  detail::read_if(j, "ffn_dim", c.ffn_dim);
  detail::read_if(j, "max_len", c.max_len);
  detail::read_if(j, "k", c.k);
  detail::read_if(j, "p_th", c.p_th);
  return c;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"model", "schedule", "optimizer"}, "config");
  TrainConfig c;
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    detail::reject_unknown(s, {"lambda_start", "lambda_end", "ramp_steps"}, "schedule");
    detail::read_if(s, "lambda_start", c.schedule.lambda_start);
    detail::read_if(s, "lambda_end", c.schedule.lambda_end);
    detail::read_if(s, "ramp_steps", c.schedule.ramp_steps);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::reject_unknown(
        o, {"learning_rate", "beta1", "beta2", "epsilon", "labeled_batch", "unlabeled_batch", "steps"}, "optimizer");
    detail::read_if(o, "learning_rate", c.optimizer.learning_rate);
    detail::read_if(o, "beta1", c.optimizer.beta1);
    detail::read_if(o, "beta2", c.optimizer.beta2);
    detail::read_if(o, "epsilon", c.optimizer.epsilon);
    detail::read_if(o, "labeled_batch", c.optimizer.labeled_batch);
    detail::read_if(o, "unlabeled_batch", c.optimizer.unlabeled_batch);
    detail::read_if(o, "steps", c.optimizer.steps);
  }
  return c;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  try {
    return train_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace samie

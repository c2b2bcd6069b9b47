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


// Run descriptor stored next to every output so an artifact can be
// regenerated from it alone.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "samie/config.hpp"
#include "samie/error.hpp"

namespace samie {

struct ExperimentManifest {
  std::string corpus;  // prepared training split (JSON lines)
  std::string test;    // prepared test split (JSON lines)
  std::string bank;
  std::uint64_t split_seed = 0;
  std::uint64_t seed = 0;
  long labeled_size = 512;
  TrainConfig config;
  std::string output_dir;

  bool operator==(const ExperimentManifest&) const = default;
};

inline nlohmann::ordered_json to_json(const ExperimentManifest& m) {
  return {{"corpus", m.corpus},
          {"test", m.test},
          {"bank", m.bank},
          {"split_seed", m.split_seed},
          {"seed", m.seed},
          {"labeled_size", m.labeled_size},
          {"config", to_json(m.config)},
          {"output_dir", m.output_dir}};
}

inline ExperimentManifest manifest_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"corpus", "test", "bank", "split_seed", "seed", "labeled_size", "config", "output_dir"},
                         "manifest");
  ExperimentManifest m;
  detail::read_if(j, "corpus", m.corpus);
  detail::read_if(j, "test", m.test);
  detail::read_if(j, "bank", m.bank);
  detail::read_if(j, "split_seed", m.split_seed);
  detail::read_if(j, "seed", m.seed);
  detail::read_if(j, "labeled_size", m.labeled_size);
  detail::read_if(j, "output_dir", m.output_dir);
  if (j.contains("config")) m.config = train_config_from_json(j.at("config"));
  if (m.labeled_size < 0) throw ValidationError("labeled_size must be non-negative");
  return m;
}

inline ExperimentManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path);
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void save_manifest(const std::string& path, const ExperimentManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(m).dump(2) << '\n';
}

}  // namespace samie

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

// Slot-annotated corpora, question banks, and the records derived from them:
// labeled (sentence, question, answer) triplets, unlabeled (sentence, answer)
// pairs, candidate question sets, and reproducible dataset splits.

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "samie/error.hpp"
#include "samie/random.hpp"

namespace samie {

using CategoryId = std::string;

// One bit per sentence token.
using AnswerMask = std::vector<std::uint8_t>;

struct SlotAnnotation {
  CategoryId category;
  int start = 0;  // inclusive token index
  int end = 0;    // exclusive token index

  bool operator==(const SlotAnnotation&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<SlotAnnotation> slots;

  bool operator==(const AnnotatedSentence&) const = default;

  AnswerMask mask_of(const SlotAnnotation& slot) const {
    AnswerMask m(tokens.size(), 0);
    for (int i = slot.start; i < slot.end; ++i) m[static_cast<std::size_t>(i)] = 1;
    return m;
  }
};

// Throws ValidationError when a span is empty, out of range, or overlaps
// another span of the same sentence.
inline void validate_sentence(const AnnotatedSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  for (const auto& slot : s.slots) {
    if (!(0 <= slot.start && slot.start < slot.end && slot.end <= n))
      throw ValidationError("sentence " + s.id + ": invalid span [" + std::to_string(slot.start) + "," +
                            std::to_string(slot.end) + ") for category " + slot.category);
  }
  std::vector<SlotAnnotation> sorted = s.slots;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].start < sorted[i - 1].end)
      throw ValidationError("sentence " + s.id + ": overlapping spans for " + sorted[i - 1].category + " and " +
                            sorted[i].category);
}

// Question groups in declaration order. Category index i refers to the i-th
// declared group everywhere in the library.
class QuestionBank {
 public:
  struct Group {
    CategoryId category;
    std::vector<std::string> questions;
  };

  QuestionBank() = default;
  explicit QuestionBank(std::vector<Group> groups) : groups_(std::move(groups)) { validate(); }

  std::size_t size() const { return groups_.size(); }
  const std::vector<Group>& groups() const { return groups_; }
  const Group& group(std::size_t i) const { return groups_.at(i); }

  std::optional<std::size_t> index_of(const CategoryId& c) const {
    for (std::size_t i = 0; i < groups_.size(); ++i)
      if (groups_[i].category == c) return i;
    return std::nullopt;
  }

  bool contains(const CategoryId& c) const { return index_of(c).has_value(); }

  std::vector<CategoryId> categories() const {
    std::vector<CategoryId> out;
    for (const auto& g : groups_) out.push_back(g.category);
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& g : groups_) j[g.category] = g.questions;
    return j;
  }

  static QuestionBank from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ValidationError("question bank must be an object of category -> [question]");
    std::vector<Group> groups;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!it.value().is_array()) throw ValidationError("question group " + it.key() + " must be an array");
      Group g{it.key(), {}};
      for (const auto& q : it.value()) {
        if (!q.is_string()) throw ValidationError("question group " + it.key() + " holds a non-string");
        g.questions.push_back(q.get<std::string>());
      }
      groups.push_back(std::move(g));
    }
    return QuestionBank(std::move(groups));
  }

 private:
  void validate() const {
    if (groups_.empty()) throw ValidationError("question bank has no groups");
    std::set<std::string> cats, questions;
    for (const auto& g : groups_) {
      if (!cats.insert(g.category).second) throw ValidationError("duplicate category " + g.category);
      if (g.questions.empty()) throw ValidationError("empty question group " + g.category);
      for (const auto& q : g.questions)
        if (!questions.insert(q).second) throw ValidationError("question appears in more than one group: " + q);
    }
  }

  std::vector<Group> groups_;
};

struct Triplet {
  AnnotatedSentence sentence;
  CategoryId category;
  std::string question;
  AnswerMask answer_mask;
};

struct SAPair {
  AnnotatedSentence sentence;
  AnswerMask answer_mask;
};

struct CandidateSet {
  struct Entry {
    CategoryId category;
    std::string question;
  };
  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }

  std::optional<std::size_t> index_of(const CategoryId& c) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].category == c) return i;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json sentence_to_json(const AnnotatedSentence& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["tokens"] = s.tokens;
  j["slots"] = nlohmann::ordered_json::array();
  for (const auto& slot : s.slots)
    j["slots"].push_back({{"category", slot.category}, {"start", slot.start}, {"end", slot.end}});
  return j;
}

inline AnnotatedSentence sentence_from_json(const nlohmann::json& j) {
  AnnotatedSentence s;
  s.id = j.at("id").get<std::string>();
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& slot : j.at("slots"))
    s.slots.push_back({slot.at("category").get<std::string>(), slot.at("start").get<int>(), slot.at("end").get<int>()});
  return s;
}

inline std::vector<AnnotatedSentence> read_slot_corpus(std::istream& in, const std::string& source = "<stream>") {
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotatedSentence s;
    try {
      s = sentence_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
    validate_sentence(s);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<AnnotatedSentence> load_slot_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus " + path);
  return read_slot_corpus(in, path);
}

inline void write_slot_corpus(std::ostream& out, const std::vector<AnnotatedSentence>& corpus) {
  for (const auto& s : corpus) out << sentence_to_json(s).dump() << '\n';
}

inline void save_slot_corpus(const std::string& path, const std::vector<AnnotatedSentence>& corpus) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_slot_corpus(out, corpus);
}

inline QuestionBank load_question_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open question bank " + path);
  std::stringstream raw;
  raw << in.rdbuf();
  // Duplicate keys would otherwise collapse silently during parsing.
  std::set<std::string> seen;
  std::optional<std::string> duplicate;
  nlohmann::ordered_json::parser_callback_t cb = [&](int depth, nlohmann::ordered_json::parse_event_t ev,
                                                     nlohmann::ordered_json& parsed) {
    if (ev == nlohmann::ordered_json::parse_event_t::key && depth == 1 && !seen.insert(parsed.get<std::string>()).second)
      duplicate = parsed.get<std::string>();
    return true;
  };
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(raw.str(), cb);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (duplicate) throw ValidationError(path + ": duplicate category " + *duplicate);
  return QuestionBank::from_json(j);
}

// Two-column BIO text (token, tag; blank line between sentences) to the
// corpus format. Tag labels are cut at the first '.', so
// "B-fromloc.city_name" becomes category "fromloc".
inline std::vector<AnnotatedSentence> read_bio(std::istream& in, const std::string& source = "<stream>",
                                               const std::string& id_prefix = "s") {
  std::vector<AnnotatedSentence> out;
  AnnotatedSentence cur;
  std::optional<SlotAnnotation> open;
  std::size_t lineno = 0;

  auto close_slot = [&]() {
    if (open) {
      open->end = static_cast<int>(cur.tokens.size());
      cur.slots.push_back(*open);
      open.reset();
    }
  };
  auto flush = [&]() {
    close_slot();
    if (!cur.tokens.empty()) {
      cur.id = id_prefix + std::to_string(out.size());
      validate_sentence(cur);
      out.push_back(std::move(cur));
    }
    cur = AnnotatedSentence{};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token, tag, extra;
    if (!(fields >> token)) {
      flush();
      continue;
    }
    if (!(fields >> tag) || (fields >> extra)) throw ParseError(source, lineno, "expected two columns: token tag");
    std::string label;
    char kind = 'O';
    if (tag != "O") {
      if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') || tag[1] != '-')
        throw ParseError(source, lineno, "bad BIO tag '" + tag + "'");
      kind = tag[0];
      label = tag.substr(2, tag.find('.') == std::string::npos ? std::string::npos : tag.find('.') - 2);
    }
    const int pos = static_cast<int>(cur.tokens.size());
    if (kind == 'O') {
      close_slot();
    } else if (kind == 'B' || !open || open->category != label) {
      // An I- tag that does not continue the open slot starts a new one.
      close_slot();
      open = SlotAnnotation{label, pos, pos};
    }
    cur.tokens.push_back(token);
  }
  flush();
  return out;
}

struct FilterReport {
  std::size_t kept = 0;
  std::vector<std::string> dropped;  // "<id>: <reason>"
};

// Keeps sentences whose every slot category is in the bank and whose spans
// are well formed and disjoint.
inline std::vector<AnnotatedSentence> filter_for_bank(const std::vector<AnnotatedSentence>& corpus,
                                                      const QuestionBank& bank, FilterReport* report = nullptr) {
  std::vector<AnnotatedSentence> out;
  for (const auto& s : corpus) {
    std::string reason;
    try {
      validate_sentence(s);
    } catch (const ValidationError& e) {
      reason = e.what();
    }
    if (reason.empty())
      for (const auto& slot : s.slots)
        if (!bank.contains(slot.category)) {
          reason = "category outside bank: " + slot.category;
          break;
        }
    if (reason.empty()) {
      out.push_back(s);
    } else if (report != nullptr) {
      report->dropped.push_back(s.id + ": " + reason);
    }
  }
  if (report != nullptr) report->kept = out.size();
  return out;
}

// ---------------------------------------------------------------------------
// Derived records

inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::vector<Triplet> make_triplets(const AnnotatedSentence& sentence, const QuestionBank& bank, Rng& rng) {
  std::vector<Triplet> out;
  for (const auto& slot : sentence.slots) {
    const auto idx = bank.index_of(slot.category);
    if (!idx) throw ValidationError("sentence " + sentence.id + ": unknown category " + slot.category);
    const auto& qs = bank.group(*idx).questions;
    out.push_back({sentence, slot.category, qs[uniform_index(qs.size(), rng)], sentence.mask_of(slot)});
  }
  return out;
}

inline std::vector<SAPair> make_sa_pairs(const AnnotatedSentence& sentence) {
  std::vector<SAPair> out;
  for (const auto& slot : sentence.slots) out.push_back({sentence, sentence.mask_of(slot)});
  return out;
}

inline CandidateSet sample_candidate_set(const QuestionBank& bank, Rng& rng) {
  CandidateSet c;
  for (const auto& g : bank.groups()) c.entries.push_back({g.category, g.questions[uniform_index(g.questions.size(), rng)]});
  return c;
}

// First question of every group; used wherever results must not depend on
// sampling.
inline CandidateSet first_candidate_set(const QuestionBank& bank) {
  CandidateSet c;
  for (const auto& g : bank.groups()) c.entries.push_back({g.category, g.questions.front()});
  return c;
}

struct DatasetSplit {
  std::vector<AnnotatedSentence> train;
  std::vector<AnnotatedSentence> test;
};

// Sentence-level split; |test| = round(test_fraction * |corpus|). Both parts
// keep corpus order.
inline DatasetSplit split_dataset(const std::vector<AnnotatedSentence>& corpus, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test fraction must lie in (0,1)");
  if (corpus.empty()) throw ValidationError("cannot split an empty corpus");
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(corpus.size())));
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> in_test(corpus.size(), 0);
  for (std::size_t i = 0; i < n_test; ++i) in_test[order[i]] = 1;
  DatasetSplit split;
  for (std::size_t i = 0; i < corpus.size(); ++i) (in_test[i] ? split.test : split.train).push_back(corpus[i]);
  return split;
}

struct LabeledSubset {
  std::vector<Triplet> labeled;
  std::vector<SAPair> unlabeled;
  std::vector<std::string> labeled_ids;
};

// Expands n_sentences randomly chosen train sentences to triplets and every
// remaining train sentence to (s, a)-pairs.
inline LabeledSubset sample_labeled_subset(const std::vector<AnnotatedSentence>& train, std::size_t n_sentences,
                                           const QuestionBank& bank, std::uint64_t seed) {
  if (n_sentences > train.size())
    throw ValidationError("requested " + std::to_string(n_sentences) + " labeled sentences but train has " +
                          std::to_string(train.size()));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> chosen(train.size(), 0);
  for (std::size_t i = 0; i < n_sentences; ++i) chosen[order[i]] = 1;
  LabeledSubset out;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (chosen[i]) {
      auto t = make_triplets(train[i], bank, rng);
      out.labeled.insert(out.labeled.end(), t.begin(), t.end());
      out.labeled_ids.push_back(train[i].id);
    } else {
      auto p = make_sa_pairs(train[i]);
      out.unlabeled.insert(out.unlabeled.end(), p.begin(), p.end());
    }
  }
  return out;
}

}  // namespace samie

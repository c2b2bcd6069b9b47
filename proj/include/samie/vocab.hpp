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

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "samie/corpus.hpp"

namespace samie {

// Lower-cased word vocabulary. Id 0 is padding, id 1 the unknown word.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() : words_{"<pad>", "<unk>"} {
    index_["<pad>"] = kPad;
    index_["<unk>"] = kUnk;
  }

  static std::string normalize(std::string_view w) {
    std::string out(w);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }

  int add(std::string_view word) {
    std::string w = normalize(word);
    auto it = index_.find(w);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(words_.size());
    index_.emplace(w, id);
    words_.push_back(std::move(w));
    return id;
  }

  int id(std::string_view word) const {
    auto it = index_.find(normalize(word));
    return it == index_.end() ? kUnk : it->second;
  }

  std::vector<int> encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
  }

  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

  static Vocabulary from_words(const std::vector<std::string>& words) {
    if (words.size() < 2 || words[0] != "<pad>" || words[1] != "<unk>")
      throw ValidationError("vocabulary must start with <pad>, <unk>");
    Vocabulary v;
    for (std::size_t i = 2; i < words.size(); ++i) v.add(words[i]);
    if (v.size() != words.size()) throw ValidationError("vocabulary holds duplicate words");
    return v;
  }

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// Whitespace split with trailing punctuation ("where to?") split off.
inline std::vector<std::string> tokenize_question(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    std::string trail;
    while (!cur.empty() && std::ispunct(static_cast<unsigned char>(cur.back())) && cur.back() != '_') {
      trail.insert(trail.begin(), cur.back());
      cur.pop_back();
    }
    if (!cur.empty()) out.push_back(cur);
    for (char c : trail) out.emplace_back(1, c);
    cur.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Vocabulary over training sentences and every bank question.
inline Vocabulary build_vocabulary(const std::vector<AnnotatedSentence>& train, const QuestionBank& bank) {
  Vocabulary v;
  for (const auto& s : train)
    for (const auto& t : s.tokens) v.add(t);
  for (const auto& g : bank.groups())
    for (const auto& q : g.questions)
      for (const auto& t : tokenize_question(q)) v.add(t);
  return v;
}

}  // namespace samie

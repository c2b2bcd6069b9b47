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

// Built-in data: default question banks for the flight-query and emergency
// news schemas, a ten-sentence toy corpus, and a seeded slot grammar that
// generates flight queries with the seven flight-query slot types.
//
// The grammar draws every slot's carrier phrase ("from", "bound for",
// "with a layover in", ...) from a long-tailed distribution, so a few hundred
// sentences cover the frequent phrasings well and the rare ones barely.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "samie/corpus.hpp"
#include "samie/random.hpp"

namespace samie {

inline QuestionBank default_atis_bank() {
  return QuestionBank({
      {"airline", {"which airline?", "what airline is it?", "which carrier operates the flight?",
                   "what company flies it?"}},
      {"arrive_time", {"when does it arrive?", "what is the arrival time?", "when does the flight land?",
                       "what time does it get in?"}},
      {"depart_time", {"when does it depart?", "what is the departure time?", "when does the flight leave?",
                       "what time does it take off?"}},
      {"return_time", {"when does it return?", "what is the return time?", "when is the flight back?",
                       "what time is the return trip?"}},
      {"fromloc", {"where from?", "where does it depart from?", "what is the origin city?",
                   "which city does it leave from?"}},
      {"toloc", {"where to?", "where does it go?", "what is the destination city?", "which city does it fly to?"}},
      {"stoploc", {"where does it stop?", "what is the stopover city?", "where is the layover?",
                   "which city does it connect through?"}},
  });
}

inline QuestionBank default_cec_bank() {
  return QuestionBank({
      {"time", {"when did it happen?", "what time did the event occur?"}},
      {"location", {"where did it happen?", "what is the place of the event?"}},
      {"denoter", {"what happened?", "which word denotes the event?"}},
      {"participant", {"who was involved?", "who took part in the event?"}},
  });
}

namespace detail {

inline std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Appends words; when category is non-empty the words form one slot.
struct SentenceBuilder {
  AnnotatedSentence s;

  void words(const std::string& text) {
    for (auto& w : split_words(text)) s.tokens.push_back(std::move(w));
  }
  void slot(const std::string& category, const std::string& text) {
    const int start = static_cast<int>(s.tokens.size());
    words(text);
    s.slots.push_back({category, start, static_cast<int>(s.tokens.size())});
  }
};

}  // namespace detail

// Ten hand-written flight queries; the first is the running example with
// origin, destination and arrival time.
inline std::vector<AnnotatedSentence> toy_corpus() {
  struct Plan {
    std::vector<std::pair<std::string, std::string>> parts;  // (category or "", text)
  };
  const std::vector<Plan> plans = {
      {{{"", "the plane from"}, {"fromloc", "shanghai"}, {"", "will arrive in"}, {"toloc", "beijing"},
        {"", "on"}, {"arrive_time", "november 2nd"}}},
      {{{"", "show flights from"}, {"fromloc", "denver"}, {"", "to"}, {"toloc", "boston"}}},
      {{{"", "list"}, {"airline", "delta"}, {"", "flights to"}, {"toloc", "atlanta"}}},
      {{{"", "i need a flight leaving at"}, {"depart_time", "8 am"}, {"", "from"}, {"fromloc", "dallas"}}},
      {{{"", "flights from"}, {"fromloc", "seattle"}, {"", "to"}, {"toloc", "miami"}, {"", "via"},
        {"stoploc", "chicago"}}},
      {{{"", "which flights arrive in"}, {"toloc", "phoenix"}, {"", "before"}, {"arrive_time", "noon"}}},
      {{{"", "show me"}, {"airline", "united"}, {"", "flights from"}, {"fromloc", "houston"}}},
      {{{"", "a round trip to"}, {"toloc", "orlando"}, {"", "returning at"}, {"return_time", "6 pm"}}},
      {{{"", "flights from"}, {"fromloc", "boston"}, {"", "stopping in"}, {"stoploc", "detroit"}}},
      {{{"", "what flights leave"}, {"fromloc", "newark"}, {"", "after"}, {"depart_time", "5 pm"}}},
  };
  std::vector<AnnotatedSentence> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    detail::SentenceBuilder b;
    b.s.id = "toy" + std::to_string(i);
    for (const auto& [cat, text] : plans[i].parts) {
      if (cat.empty()) {
        b.words(text);
      } else {
        b.slot(cat, text);
      }
    }
    out.push_back(std::move(b.s));
  }
  return out;
}

struct SlotGrammarOptions {
  std::size_t sentences = 3000;
  // Exponent of the 1/rank^s weights over carrier phrases.
  double carrier_skew = 1.3;
};

// Flight-query generator. Deterministic given (options, seed).
inline std::vector<AnnotatedSentence> generate_flight_corpus(const SlotGrammarOptions& opt, std::uint64_t seed) {
  static const std::vector<std::string> kCities = {
      "boston",        "denver",      "atlanta",   "dallas",        "pittsburgh", "baltimore",  "philadelphia",
      "san francisco", "oakland",     "washington", "new york",     "chicago",    "detroit",    "seattle",
      "miami",         "orlando",     "phoenix",   "houston",       "memphis",    "nashville",  "charlotte",
      "newark",        "cleveland",   "cincinnati", "milwaukee",    "minneapolis", "st. louis", "kansas city",
      "las vegas",     "los angeles", "san diego", "salt lake city", "tampa",     "indianapolis", "columbus",
      "montreal",      "toronto",     "burbank",   "ontario",       "long beach"};
  static const std::vector<std::string> kAirlines = {
      "united",   "delta",         "american airlines", "continental", "us air",      "twa",
      "northwest", "alaska airlines", "southwest",      "lufthansa",   "air canada",  "midwest express",
      "tower air", "frontier",     "america west"};
  static const std::vector<std::string> kHours = {"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12"};
  static const std::vector<std::string> kNamedTimes = {"noon", "midnight", "the morning", "the afternoon",
                                                       "the evening", "early morning", "late evening", "tonight"};

  // Carrier phrases per slot, most frequent first. '#' marks the slot.
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kCarriers = {
      {"fromloc",
       {"from #", "leaving #", "departing #", "out of #", "originating in #", "that depart from #", "starting in #",
        "beginning in #"}},
      {"toloc",
       {"to #", "arriving in #", "going to #", "into #", "bound for #", "heading to #", "with destination #",
        "landing in #"}},
      {"stoploc",
       {"via #", "stopping in #", "with a stop in #", "through #", "connecting in #", "with a layover in #",
        "making a stopover in #", "touching down in #"}},
      {"airline",
       {"on #", "with #", "flying #", "operated by #", "by #", "aboard #", "using #", "booked on #"}},
      {"depart_time",
       {"leaving at #", "departing at #", "that leave at #", "departing before #", "leaving after #",
        "which take off around #", "with a departure time of #", "scheduled out at #"}},
      {"arrive_time",
       {"arriving at #", "that arrive by #", "arriving before #", "getting in at #", "landing at #",
        "which arrive around #", "with an arrival time of #", "due in at #"}},
      {"return_time",
       {"returning at #", "coming back at #", "returning before #", "with a return flight at #", "and back by #",
        "with the return trip leaving at #", "flying home at #", "due back at #"}},
  };
  // Probability of a slot type appearing in a sentence.
  static const std::vector<std::pair<std::string, double>> kPresence = {
      {"fromloc", 0.85}, {"toloc", 0.85}, {"stoploc", 0.18}, {"airline", 0.30},
      {"depart_time", 0.35}, {"arrive_time", 0.22}, {"return_time", 0.12}};
  static const std::vector<std::string> kOpeners = {
      "show me",   "i want",       "list",          "i need",          "give me",       "what are",
      "find",      "are there any", "please list",  "i would like",    "can you show me", "i am looking for",
      "what is",   "tell me about", "display",      "i'd like to see"};
  static const std::vector<std::string> kHeads = {"flights", "the flights", "a flight", "fares", "nonstop flights",
                                                  "a round trip", "the cheapest flight", "all flights", "a ticket",
                                                  "morning flights"};
  static const std::vector<std::string> kTails = {"", "", "", "please", "on monday", "tomorrow", "next week",
                                                  "in first class", "for two people", "on a boeing 747",
                                                  "with a meal", "on friday"};

  Rng rng(seed);
  auto pick = [&rng](const std::vector<std::string>& v) -> const std::string& { return v[uniform_index(v.size(), rng)]; };
  auto pick_skewed = [&](const std::vector<std::string>& v) -> const std::string& {
    std::vector<double> w;
    for (std::size_t i = 0; i < v.size(); ++i) w.push_back(1.0 / std::pow(static_cast<double>(i + 1), opt.carrier_skew));
    std::discrete_distribution<std::size_t> d(w.begin(), w.end());
    return v[d(rng)];
  };
  auto time_phrase = [&]() -> std::string {
    std::uniform_real_distribution<double> u(0, 1);
    if (u(rng) < 0.3) return pick(kNamedTimes);
    std::string t = pick(kHours);
    if (u(rng) < 0.4) t += (u(rng) < 0.5 ? " 30" : " 15");
    return t + (u(rng) < 0.5 ? " am" : " pm");
  };
  auto filler_for = [&](const std::string& category) -> std::string {
    if (category == "fromloc" || category == "toloc" || category == "stoploc") {
      std::string c = pick(kCities);
      // Same-sentence repeats are avoided by the caller.
      return c;
    }
    if (category == "airline") return pick(kAirlines);
    return time_phrase();
  };

  std::vector<AnnotatedSentence> out;
  std::uniform_real_distribution<double> u(0, 1);
  while (out.size() < opt.sentences) {
    std::vector<std::string> cats;
    for (const auto& [cat, p] : kPresence)
      if (u(rng) < p) cats.push_back(cat);
    if (cats.empty()) continue;
    std::shuffle(cats.begin(), cats.end(), rng);

    detail::SentenceBuilder b;
    b.s.id = "syn" + std::to_string(out.size());
    b.words(pick(kOpeners));
    // Airline sometimes precedes the head noun: "delta flights".
    bool airline_done = false;
    if (std::find(cats.begin(), cats.end(), "airline") != cats.end() && u(rng) < 0.35) {
      b.slot("airline", pick(kAirlines));
      airline_done = true;
    }
    b.words(pick(kHeads));
    std::vector<std::string> used_cities;
    for (const auto& cat : cats) {
      if (cat == "airline" && airline_done) continue;
      const auto& carriers = std::find_if(kCarriers.begin(), kCarriers.end(), [&](const auto& c) { return c.first == cat; })->second;
      const std::string& carrier = pick_skewed(carriers);
      std::string value = filler_for(cat);
      if (cat == "fromloc" || cat == "toloc" || cat == "stoploc") {
        while (std::find(used_cities.begin(), used_cities.end(), value) != used_cities.end()) value = filler_for(cat);
        used_cities.push_back(value);
      }
      const auto hash = carrier.find('#');
      const std::string before = carrier.substr(0, hash);
      const std::string after = carrier.substr(hash + 1);
      b.words(before);
      b.slot(cat, value);
      b.words(after);
    }
    b.words(pick(kTails));
    out.push_back(std::move(b.s));
  }
  return out;
}

}  // namespace samie

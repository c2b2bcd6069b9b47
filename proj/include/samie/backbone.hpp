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

// Shared neural substrate: one word/position embedding table, three encoder
// stacks (sentence, question, answer), two merging decoder stacks, and the
// building blocks they are made of.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/config.hpp"
#include "samie/error.hpp"
#include "samie/random.hpp"

namespace samie {

enum class EncoderRole { Sentence = 0, Question = 1, Answer = 2 };

// Decoder_0 merges (sentence, question) for answer extraction; Decoder_1
// merges (sentence, answer) for question selection.
enum class DecoderRole { AnswerExtraction = 0, QuestionSelection = 1 };

// Token ids of several sequences stacked end to end. Id 0 is padding.
struct PackedSequences {
  std::vector<int> ids;
  Segments seg;

  void push(std::span<const int> seq) {
    ids.insert(ids.end(), seq.begin(), seq.end());
    seg.push(static_cast<int>(seq.size()));
  }

  std::vector<std::uint8_t> valid() const {
    std::vector<std::uint8_t> v(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) v[i] = ids[i] != 0;
    return v;
  }

  static PackedSequences of(const std::vector<std::vector<int>>& seqs) {
    PackedSequences p;
    for (const auto& s : seqs) p.push(s);
    return p;
  }
};

// Encoder or decoder output for a packed batch; valid[r] == 0 marks padding.
struct EncodedBatch {
  Var states;
  Segments seg;
  std::vector<std::uint8_t> valid;
};

// A single encoded sequence detached from any tape.
struct EncodedSequence {
  Matrix states;                           // length x d_model
  std::vector<std::uint8_t> padding_mask;  // 1 where the position is padding
};

namespace detail {

inline Matrix random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace detail

struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Linear create(ParameterStore& store, const std::string& name, int in, int out, Rng& rng) {
    Linear l;
    l.w = &store.add(name + ".w", detail::random_normal(in, out, std::sqrt(2.0 / (in + out)), rng));
    l.b = &store.add(name + ".b", Matrix::Zero(1, out));
    return l;
  }

  Var operator()(Tape& t, Var x) const { return ops::linear(t, x, t.parameter(*w), t.parameter(*b)); }
};

struct LayerNorm {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;

  static LayerNorm create(ParameterStore& store, const std::string& name, int d) {
    return {&store.add(name + ".gain", Matrix::Ones(1, d)), &store.add(name + ".bias", Matrix::Zero(1, d))};
  }

  Var operator()(Tape& t, Var x) const { return ops::layer_norm(t, x, t.parameter(*gain), t.parameter(*bias)); }
};

struct MultiHeadAttention {
  Linear q, k, v, o;
  int heads = 1;

  static MultiHeadAttention create(ParameterStore& store, const std::string& name, int d, int heads, Rng& rng) {
    return {Linear::create(store, name + ".q", d, d, rng), Linear::create(store, name + ".k", d, d, rng),
            Linear::create(store, name + ".v", d, d, rng), Linear::create(store, name + ".o", d, d, rng), heads};
  }

  // Queries from x (layout xseg) attend over keys/values from y (layout yseg).
  Var operator()(Tape& t, Var x, const Segments& xseg, Var y, const Segments& yseg,
                 std::span<const std::uint8_t> yvalid) const {
    Var a = ops::attention(t, q(t, x), k(t, y), v(t, y), xseg, yseg, yvalid, heads);
    return o(t, a);
  }
};

struct FeedForward {
  Linear in, out;

  static FeedForward create(ParameterStore& store, const std::string& name, int d, int hidden, Rng& rng) {
    return {Linear::create(store, name + ".in", d, hidden, rng), Linear::create(store, name + ".out", hidden, d, rng)};
  }

  Var operator()(Tape& t, Var x) const { return out(t, ops::gelu(t, in(t, x))); }
};

// Pre-norm encoder block: x + SelfAttn(LN(x)), then + FFN(LN(.)).
struct EncoderLayer {
  LayerNorm ln1, ln2;
  MultiHeadAttention self;
  FeedForward ffn;

  static EncoderLayer create(ParameterStore& store, const std::string& name, const ModelConfig& c, Rng& rng) {
    EncoderLayer l;
    l.ln1 = LayerNorm::create(store, name + ".ln1", c.d_model);
    l.self = MultiHeadAttention::create(store, name + ".self", c.d_model, c.n_heads, rng);
    l.ln2 = LayerNorm::create(store, name + ".ln2", c.d_model);
    l.ffn = FeedForward::create(store, name + ".ffn", c.d_model, c.ffn_dim, rng);
    return l;
  }

  Var operator()(Tape& t, Var x, const Segments& seg, std::span<const std::uint8_t> valid) const {
    Var n1 = ln1(t, x);
    Var h = ops::add(t, x, self(t, n1, seg, n1, seg, valid));
    return ops::add(t, h, ffn(t, ln2(t, h)));
  }
};

// Pre-norm decoder block without causal masking: self-attention over the
// primary stream x, cross-attention from x into y, feed-forward.
struct DecoderLayer {
  LayerNorm ln1, ln2, ln3;
  MultiHeadAttention self, cross;
  FeedForward ffn;

  static DecoderLayer create(ParameterStore& store, const std::string& name, const ModelConfig& c, Rng& rng) {
    DecoderLayer l;
    l.ln1 = LayerNorm::create(store, name + ".ln1", c.d_model);
    l.self = MultiHeadAttention::create(store, name + ".self", c.d_model, c.n_heads, rng);
    l.ln2 = LayerNorm::create(store, name + ".ln2", c.d_model);
    l.cross = MultiHeadAttention::create(store, name + ".cross", c.d_model, c.n_heads, rng);
    l.ln3 = LayerNorm::create(store, name + ".ln3", c.d_model);
    l.ffn = FeedForward::create(store, name + ".ffn", c.d_model, c.ffn_dim, rng);
    return l;
  }

  Var self_block(Tape& t, Var x, const Segments& seg, std::span<const std::uint8_t> valid) const {
    Var n1 = ln1(t, x);
    return ops::add(t, x, self(t, n1, seg, n1, seg, valid));
  }
};

// Row indices that replicate segment layout `seg` according to `which`:
// output segment p is a copy of input segment which[p].
inline std::pair<std::vector<int>, Segments> expand_segments(const Segments& seg, std::span<const int> which) {
  std::vector<int> index;
  Segments out;
  for (int s : which) {
    if (s < 0 || s >= seg.size()) throw std::out_of_range("segment index out of range");
    for (int r = 0; r < seg.length(s); ++r) index.push_back(seg.begin(s) + r);
    out.push(seg.length(s));
  }
  return {std::move(index), std::move(out)};
}

inline std::vector<std::uint8_t> gather_mask(std::span<const std::uint8_t> mask, std::span<const int> index) {
  std::vector<std::uint8_t> out;
  out.reserve(index.size());
  for (int i : index) out.push_back(mask[static_cast<std::size_t>(i)]);
  return out;
}

// Pairs (x segment, y segment) to merge.
struct MergePlan {
  std::vector<int> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
  void add(int xi, int yi) {
    x.push_back(xi);
    y.push_back(yi);
  }
};

// Word and learned position embeddings shared by every encoder.
struct EmbeddingTable {
  Parameter* word = nullptr;      // vocab_size x d_model
  Parameter* position = nullptr;  // max_len x d_model

  static EmbeddingTable create(ParameterStore& store, const ModelConfig& config, Rng& rng) {
    const double emb_std = 1.0 / std::sqrt(static_cast<double>(config.d_model));
    EmbeddingTable e;
    e.word = &store.add("embed.word", detail::random_normal(config.vocab_size, config.d_model, emb_std, rng));
    e.position = &store.add("embed.position", detail::random_normal(config.max_len, config.d_model, emb_std, rng));
    return e;
  }

  // Row r of segment s is word[ids[r]] + position[r - begin(s)].
  Var operator()(Tape& t, const PackedSequences& in) const {
    const auto vocab = word->value.rows();
    const auto max_len = position->value.rows();
    std::vector<int> pos;
    pos.reserve(in.ids.size());
    for (int s = 0; s < in.seg.size(); ++s) {
      if (in.seg.length(s) > max_len)
        throw ValidationError("sequence of length " + std::to_string(in.seg.length(s)) + " exceeds max_len " +
                              std::to_string(max_len));
      for (int r = 0; r < in.seg.length(s); ++r) pos.push_back(r);
    }
    for (int id : in.ids)
      if (id < 0 || id >= vocab) throw ValidationError("token id " + std::to_string(id) + " out of vocabulary");
    Var w = ops::gather_rows(t, t.parameter(*word), in.ids);
    Var p = ops::gather_rows(t, t.parameter(*position), std::move(pos));
    return ops::add(t, w, p);
  }
};

// Encoder/decoder substrate shared by the question-selection and
// answer-extraction heads.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual const EmbeddingTable& embeddings() const = 0;

  // Non-empty sequences only.
  virtual EncodedBatch encode(Tape& t, const PackedSequences& in, EncoderRole role) const = 0;

  // Output segment p has the length of x segment plan.x[p] and is conditioned
  // on y segment plan.y[p]: every row sees all of x and all of y.
  virtual EncodedBatch merge(Tape& t, const EncodedBatch& x, const EncodedBatch& y, const MergePlan& plan,
                             DecoderRole role) const = 0;

  Var embed(Tape& t, const PackedSequences& in) const { return embeddings()(t, in); }
};

inline void require_non_empty(const PackedSequences& in) {
  for (int s = 0; s < in.seg.size(); ++s)
    if (in.seg.length(s) == 0) throw ValidationError("cannot encode an empty sequence");
}

class TransformerBackbone final : public Backbone {
 public:
  TransformerBackbone(const ModelConfig& config, ParameterStore& store, Rng& rng) : config_(config) {
    embeddings_ = EmbeddingTable::create(store, config, rng);
    const char* enc_names[] = {"enc_s", "enc_q", "enc_a"};
    for (int e = 0; e < 3; ++e)
      for (int l = 0; l < config.n_layers; ++l)
        encoders_[e].push_back(EncoderLayer::create(store, std::string(enc_names[e]) + "." + std::to_string(l), config, rng));
    const char* dec_names[] = {"dec_0", "dec_1"};
    for (int e = 0; e < 2; ++e)
      for (int l = 0; l < config.n_layers; ++l)
        decoders_[e].push_back(DecoderLayer::create(store, std::string(dec_names[e]) + "." + std::to_string(l), config, rng));
  }

  const EmbeddingTable& embeddings() const override { return embeddings_; }

  EncodedBatch encode(Tape& t, const PackedSequences& in, EncoderRole role) const override {
    require_non_empty(in);
    EncodedBatch out{embed(t, in), in.seg, in.valid()};
    for (const auto& layer : encoders_[static_cast<int>(role)]) out.states = layer(t, out.states, out.seg, out.valid);
    return out;
  }

  EncodedBatch merge(Tape& t, const EncodedBatch& x, const EncodedBatch& y, const MergePlan& plan,
                     DecoderRole role) const override {
    auto [xindex, pseg] = expand_segments(x.seg, plan.x);
    auto [yindex, yseg] = expand_segments(y.seg, plan.y);
    std::vector<std::uint8_t> pvalid = gather_mask(x.valid, xindex);
    std::vector<std::uint8_t> yvalid = gather_mask(y.valid, yindex);
    const auto& layers = decoders_[static_cast<int>(role)];
    Var h = x.states;
    bool expanded = false;
    for (const auto& layer : layers) {
      if (!expanded) {
        // Self-attention of the first block only sees x, so it runs once per
        // distinct x segment before replication.
        h = ops::gather_rows(t, layer.self_block(t, h, x.seg, x.valid), xindex);
        expanded = true;
      } else {
        h = layer.self_block(t, h, pseg, pvalid);
      }
      // Keys and values are projected on the distinct y rows, then replicated.
      Var n2 = layer.ln2(t, h);
      Var kv_k = ops::gather_rows(t, layer.cross.k(t, y.states), yindex);
      Var kv_v = ops::gather_rows(t, layer.cross.v(t, y.states), yindex);
      Var a = ops::attention(t, layer.cross.q(t, n2), kv_k, kv_v, pseg, yseg, yvalid, layer.cross.heads);
      Var h2 = ops::add(t, h, layer.cross.o(t, a));
      h = ops::add(t, h2, layer.ffn(t, layer.ln3(t, h2)));
    }
    if (!expanded) h = ops::gather_rows(t, h, xindex);
    return {h, std::move(pseg), std::move(pvalid)};
  }

 private:
  ModelConfig config_;
  EmbeddingTable embeddings_;
  std::vector<EncoderLayer> encoders_[3];
  std::vector<DecoderLayer> decoders_[2];
};

}  // namespace samie

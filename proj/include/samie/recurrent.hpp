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

// Bidirectional LSTM encoders with additive attention merging; the recurrent
// reference architecture. Padding rows are skipped by the recurrence and
// produce zero states.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "samie/autograd.hpp"
#include "samie/backbone.hpp"

namespace samie {
namespace ops {

inline Var concat_cols(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.rows() != bv.rows()) throw std::invalid_argument("concat_cols row mismatch");
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const Eigen::Index ca = av.cols(), cb = bv.cols();
  return t.record(std::move(out), {a, b}, [a, b, ca, cb](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a) += g.leftCols(ca);
    if (t.needs_grad(b)) t.grad(b) += g.rightCols(cb);
  });
}

// LSTM recurrence over each segment given precomputed input gates
// gx = x Wx + b (N x 4h, gate order i, f, g, o) and recurrent weights
// wh (h x 4h). Returns N x h hidden states.
inline Var lstm_recurrence(Tape& t, Var gx, Var wh, const Segments& seg, std::span<const std::uint8_t> valid,
                           bool reverse) {
  const Matrix& g = t.value(gx);
  const Matrix& w = t.value(wh);
  const Eigen::Index h = w.rows();
  if (w.cols() != 4 * h || g.cols() != 4 * h || g.rows() != seg.rows()) throw std::invalid_argument("lstm shape");
  const Eigen::Index n = g.rows();
  auto gates = std::make_shared<Matrix>(Matrix::Zero(n, 4 * h));  // activated i, f, g, o
  auto cells = std::make_shared<Matrix>(Matrix::Zero(n, h));
  Matrix out = Matrix::Zero(n, h);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);  // previous valid row in scan order
  for (int s = 0; s < seg.size(); ++s) {
    int last = -1;
    for (int k = 0; k < seg.length(s); ++k) {
      const int r = reverse ? seg.begin(s) + seg.length(s) - 1 - k : seg.begin(s) + k;
      if (valid[r] == 0) continue;
      RowVector z = g.row(r);
      if (last >= 0) z.noalias() += out.row(last) * w;
      auto act = gates->row(r);
      for (Eigen::Index j = 0; j < h; ++j) {
        act(j) = 1.0 / (1.0 + std::exp(-z(j)));
        act(h + j) = 1.0 / (1.0 + std::exp(-z(h + j)));
        act(2 * h + j) = std::tanh(z(2 * h + j));
        act(3 * h + j) = 1.0 / (1.0 + std::exp(-z(3 * h + j)));
      }
      for (Eigen::Index j = 0; j < h; ++j) {
        const Real c_prev = last >= 0 ? (*cells)(last, j) : 0.0;
        (*cells)(r, j) = act(h + j) * c_prev + act(j) * act(2 * h + j);
        out(r, j) = act(3 * h + j) * std::tanh((*cells)(r, j));
      }
      prev[r] = last;
      last = r;
    }
  }
  return t.record(out, {gx, wh}, [gx, wh, seg, reverse, gates, cells, out, h,
                                 mask = std::vector<std::uint8_t>(valid.begin(), valid.end()),
                                 prev = std::move(prev)](Tape& t, const Matrix& dout) {
    const Matrix& w = t.value(wh);
    Matrix dgx = Matrix::Zero(dout.rows(), 4 * h);
    Matrix dw = Matrix::Zero(h, 4 * h);
    for (int s = 0; s < seg.size(); ++s) {
      RowVector dh_next = RowVector::Zero(h), dc_next = RowVector::Zero(h);
      for (int k = seg.length(s) - 1; k >= 0; --k) {
        const int r = reverse ? seg.begin(s) + seg.length(s) - 1 - k : seg.begin(s) + k;
        if (mask[r] == 0) continue;
        const auto act = gates->row(r);
        const int p = prev[r];
        RowVector dh = dout.row(r) + dh_next;
        RowVector dz(4 * h);
        for (Eigen::Index j = 0; j < h; ++j) {
          const Real i = act(j), f = act(h + j), gg = act(2 * h + j), o = act(3 * h + j);
          const Real tc = std::tanh((*cells)(r, j));
          const Real dc = dh(j) * o * (1.0 - tc * tc) + dc_next(j);
          const Real c_prev = p >= 0 ? (*cells)(p, j) : 0.0;
          dz(j) = dc * gg * i * (1.0 - i);
          dz(h + j) = dc * c_prev * f * (1.0 - f);
          dz(2 * h + j) = dc * i * (1.0 - gg * gg);
          dz(3 * h + j) = dh(j) * tc * o * (1.0 - o);
          dc_next(j) = dc * f;
        }
        dgx.row(r) = dz;
        if (p >= 0) {
          dw.noalias() += out.row(p).transpose() * dz;
          dh_next.noalias() = dz * w.transpose();
        } else {
          dh_next.setZero();
        }
      }
    }
    if (t.needs_grad(gx)) t.grad(gx) += dgx;
    if (t.needs_grad(wh)) t.grad(wh) += dw;
  });
}

// Additive attention: query row t of pair segment p attends over key rows of
// segment p with e_tj = v . tanh(xp_t + yp_j); returns sum_j a_tj values_j.
// xp is Nx x a, yp is Ny x a, v is 1 x a, values is Ny x d.
inline Var additive_attention(Tape& t, Var xp, Var yp, Var v, Var values, const Segments& xseg, const Segments& yseg,
                              std::span<const std::uint8_t> yvalid) {
  const Matrix& xv = t.value(xp);
  const Matrix& yv = t.value(yp);
  const Matrix& vv = t.value(v);
  const Matrix& val = t.value(values);
  if (xseg.size() != yseg.size()) throw std::invalid_argument("additive attention segment mismatch");
  auto probs = std::make_shared<std::vector<Matrix>>();
  Matrix out = Matrix::Zero(xv.rows(), val.cols());
  for (int s = 0; s < xseg.size(); ++s) {
    const int xb = xseg.begin(s), nx = xseg.length(s), yb = yseg.begin(s), ny = yseg.length(s);
    Matrix e(nx, ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j)
        e(i, j) = yvalid[yb + j] ? ((xv.row(xb + i) + yv.row(yb + j)).array().tanh().matrix() * vv.row(0).transpose())(0)
                                 : -std::numeric_limits<Real>::infinity();
    Matrix p = softmax_rows(e);
    out.block(xb, 0, nx, val.cols()).noalias() = p * val.block(yb, 0, ny, val.cols());
    probs->push_back(std::move(p));
  }
  return t.record(std::move(out), {xp, yp, v, values},
                  [xp, yp, v, values, xseg, yseg, probs](Tape& t, const Matrix& g) {
                    const Matrix& xv = t.value(xp);
                    const Matrix& yv = t.value(yp);
                    const Matrix& vv = t.value(v);
                    const Matrix& val = t.value(values);
                    Matrix dxp = Matrix::Zero(xv.rows(), xv.cols());
                    Matrix dyp = Matrix::Zero(yv.rows(), yv.cols());
                    Matrix dv = Matrix::Zero(1, vv.cols());
                    Matrix dval = Matrix::Zero(val.rows(), val.cols());
                    for (int s = 0; s < xseg.size(); ++s) {
                      const int xb = xseg.begin(s), nx = xseg.length(s), yb = yseg.begin(s), ny = yseg.length(s);
                      const Matrix& p = (*probs)[static_cast<std::size_t>(s)];
                      const auto go = g.block(xb, 0, nx, g.cols());
                      dval.block(yb, 0, ny, val.cols()).noalias() += p.transpose() * go;
                      Matrix dp = go * val.block(yb, 0, ny, val.cols()).transpose();
                      for (int i = 0; i < nx; ++i) {
                        const Real expected = dp.row(i).dot(p.row(i));
                        for (int j = 0; j < ny; ++j) {
                          const Real de = p(i, j) * (dp(i, j) - expected);
                          if (p(i, j) == 0.0) continue;
                          RowVector u = (xv.row(xb + i) + yv.row(yb + j)).array().tanh().matrix();
                          dv.row(0) += de * u;
                          RowVector dpre = (de * vv.row(0).array() * (1.0 - u.array().square())).matrix();
                          dxp.row(xb + i) += dpre;
                          dyp.row(yb + j) += dpre;
                        }
                      }
                    }
                    if (t.needs_grad(xp)) t.grad(xp) += dxp;
                    if (t.needs_grad(yp)) t.grad(yp) += dyp;
                    if (t.needs_grad(v)) t.grad(v) += dv;
                    if (t.needs_grad(values)) t.grad(values) += dval;
                  });
}

}  // namespace ops

struct BiLstmLayer {
  Linear fwd_in, bwd_in;  // x Wx + b for each direction
  Parameter* fwd_rec = nullptr;
  Parameter* bwd_rec = nullptr;

  static BiLstmLayer create(ParameterStore& store, const std::string& name, int in, int hidden, Rng& rng) {
    BiLstmLayer l;
    const double sd = 1.0 / std::sqrt(static_cast<double>(hidden));
    l.fwd_in = Linear::create(store, name + ".fwd_in", in, 4 * hidden, rng);
    l.fwd_rec = &store.add(name + ".fwd_rec", detail::random_normal(hidden, 4 * hidden, sd, rng));
    l.bwd_in = Linear::create(store, name + ".bwd_in", in, 4 * hidden, rng);
    l.bwd_rec = &store.add(name + ".bwd_rec", detail::random_normal(hidden, 4 * hidden, sd, rng));
    return l;
  }

  Var operator()(Tape& t, Var x, const Segments& seg, std::span<const std::uint8_t> valid) const {
    Var f = ops::lstm_recurrence(t, fwd_in(t, x), t.parameter(*fwd_rec), seg, valid, false);
    Var b = ops::lstm_recurrence(t, bwd_in(t, x), t.parameter(*bwd_rec), seg, valid, true);
    return ops::concat_cols(t, f, b);
  }
};

// out_t = tanh([x_t ; c_t] Wc + bc) where c_t attends additively over y.
struct AdditiveMerge {
  Linear query, key, combine;
  Parameter* score = nullptr;

  static AdditiveMerge create(ParameterStore& store, const std::string& name, int d, Rng& rng) {
    AdditiveMerge m;
    m.query = Linear::create(store, name + ".query", d, d, rng);
    m.key = Linear::create(store, name + ".key", d, d, rng);
    m.score = &store.add(name + ".score", detail::random_normal(1, d, 1.0 / std::sqrt(static_cast<double>(d)), rng));
    m.combine = Linear::create(store, name + ".combine", 2 * d, d, rng);
    return m;
  }
};

class RecurrentBackbone final : public Backbone {
 public:
  RecurrentBackbone(const ModelConfig& config, ParameterStore& store, Rng& rng) : config_(config) {
    embeddings_ = EmbeddingTable::create(store, config, rng);
    const int hidden = config.d_model / 2;
    const char* enc_names[] = {"enc_s", "enc_q", "enc_a"};
    for (int e = 0; e < 3; ++e)
      for (int l = 0; l < config.n_layers; ++l)
        encoders_[e].push_back(
            BiLstmLayer::create(store, std::string(enc_names[e]) + "." + std::to_string(l), config.d_model, hidden, rng));
    const char* dec_names[] = {"dec_0", "dec_1"};
    for (int e = 0; e < 2; ++e) merges_[e] = AdditiveMerge::create(store, dec_names[e], config.d_model, rng);
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
    const AdditiveMerge& m = merges_[static_cast<int>(role)];
    auto [xindex, pseg] = expand_segments(x.seg, plan.x);
    auto [yindex, yseg] = expand_segments(y.seg, plan.y);
    std::vector<std::uint8_t> pvalid = gather_mask(x.valid, xindex);
    std::vector<std::uint8_t> yvalid = gather_mask(y.valid, yindex);
    Var xs = ops::gather_rows(t, x.states, xindex);
    Var xp = ops::gather_rows(t, m.query(t, x.states), xindex);
    Var yp = ops::gather_rows(t, m.key(t, y.states), yindex);
    Var ys = ops::gather_rows(t, y.states, yindex);
    Var ctx = ops::additive_attention(t, xp, yp, t.parameter(*m.score), ys, pseg, yseg, yvalid);
    Var h = ops::tanh(t, m.combine(t, ops::concat_cols(t, xs, ctx)));
    return {h, std::move(pseg), std::move(pvalid)};
  }

 private:
  ModelConfig config_;
  EmbeddingTable embeddings_;
  std::vector<BiLstmLayer> encoders_[3];
  AdditiveMerge merges_[2];
};

}  // namespace samie

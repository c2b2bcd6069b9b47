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

// Reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation of one forward pass. Each recorded node owns
// its value and, when any input requires a gradient, a closure that pushes the
// node's output gradient back to its inputs. Parameters enter the tape as
// leaves that alias their storage; Tape::backward() accumulates into
// Parameter::grad.
//
// Variable-length sequences travel "packed": the rows of all sequences are
// stacked into one matrix and a Segments object records where each sequence
// starts. Row-wise operations (linear layers, norms, activations) run on the
// whole packed matrix; attention and pooling respect segment boundaries.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace samie {

using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using ColVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns every trainable tensor of a model in creation order. Addresses are
// stable for the lifetime of the store.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(std::string name, Matrix init) {
    if (find(name) != nullptr) throw std::logic_error("duplicate parameter " + name);
    auto p = std::make_unique<Parameter>();
    p->name = std::move(name);
    p->grad = Matrix::Zero(init.rows(), init.cols());
    p->value = std::move(init);
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter* find(std::string_view name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  const Parameter* find(std::string_view name) const {
    for (const auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  void zero_grad() {
    for (auto& p : params_) p->grad.setZero();
  }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// Row layout of a packed batch: sequence i occupies rows
// [offsets[i], offsets[i+1]).
class Segments {
 public:
  Segments() : offsets_{0} {}
  explicit Segments(std::span<const int> lengths) : offsets_{0} {
    for (int len : lengths) push(len);
  }

  void push(int length) {
    if (length < 0) throw std::invalid_argument("negative segment length");
    offsets_.push_back(offsets_.back() + length);
  }

  int size() const { return static_cast<int>(offsets_.size()) - 1; }
  int begin(int i) const { return offsets_[i]; }
  int length(int i) const { return offsets_[i + 1] - offsets_[i]; }
  int rows() const { return offsets_.back(); }

  bool operator==(const Segments&) const = default;

 private:
  std::vector<int> offsets_;
};

struct Var {
  int id = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix&)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  Var parameter(Parameter& p) {
    Node n;
    n.ref = &p.value;
    n.param = &p;
    n.needs_grad = record_;
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  // Appends an operation result. `fn` receives the output gradient and must
  // accumulate into the inputs via grad(); it is dropped when no input needs
  // a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward fn) {
    Node n;
    n.value = std::move(value);
    if (record_) {
      for (Var in : inputs) n.needs_grad = n.needs_grad || nodes_[in.id].needs_grad;
      if (n.needs_grad) n.backward = std::move(fn);
    }
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  const Matrix& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.ref != nullptr ? *n.ref : n.value;
  }

  Real scalar(Var v) const { return value(v)(0, 0); }

  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  // Gradient buffer of v, zero-initialised on first access.
  Matrix& grad(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.size() == 0) {
      const Matrix& val = value(v);
      n.grad = Matrix::Zero(val.rows(), val.cols());
    }
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to parameters.
  void backward(Var root) {
    if (!record_) throw std::logic_error("backward on a non-recording tape");
    const Matrix& r = value(root);
    if (r.rows() != 1 || r.cols() != 1) throw std::logic_error("backward root must be scalar");
    grad(root)(0, 0) += 1.0;
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      if (n.param != nullptr) {
        n.param->grad += n.grad;
      } else if (n.backward) {
        // The closure may touch grad() of earlier nodes only; n.grad stays put.
        n.backward(*this, n.grad);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
  };

  std::vector<Node> nodes_;
  bool record_;
};

namespace ops {

inline Var matmul(Tape& t, Var a, Var b) {
  Matrix out = t.value(a) * t.value(b);
  return t.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a).noalias() += g * t.value(b).transpose();
    if (t.needs_grad(b)) t.grad(b).noalias() += t.value(a).transpose() * g;
  });
}

// x W + b, with b a 1 x out row broadcast over rows.
inline Var linear(Tape& t, Var x, Var w, Var b) {
  Matrix out = t.value(x) * t.value(w);
  out.rowwise() += t.value(b).row(0);
  return t.record(std::move(out), {x, w, b}, [x, w, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(x)) t.grad(x).noalias() += g * t.value(w).transpose();
    if (t.needs_grad(w)) t.grad(w).noalias() += t.value(x).transpose() * g;
    if (t.needs_grad(b)) t.grad(b) += g.colwise().sum();
  });
}

inline Var add(Tape& t, Var a, Var b) {
  Matrix out = t.value(a) + t.value(b);
  return t.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a) += g;
    if (t.needs_grad(b)) t.grad(b) += g;
  });
}

inline Var scale(Tape& t, Var a, Real s) {
  Matrix out = t.value(a) * s;
  return t.record(std::move(out), {a}, [a, s](Tape& t, const Matrix& g) {
    t.grad(a) += g * s;
  });
}

// wa * a + wb * b for same-shaped a and b.
inline Var axpby(Tape& t, Real wa, Var a, Real wb, Var b) {
  Matrix out = wa * t.value(a) + wb * t.value(b);
  return t.record(std::move(out), {a, b}, [a, b, wa, wb](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.grad(a) += wa * g;
    if (t.needs_grad(b)) t.grad(b) += wb * g;
  });
}

inline Var gelu(Tape& t, Var x) {
  static constexpr Real kC = 0.7978845608028654;  // sqrt(2/pi)
  static constexpr Real kA = 0.044715;
  const Matrix& xv = t.value(x);
  Matrix th = (kC * (xv.array() + kA * xv.array().cube())).tanh().matrix();
  Matrix out = (0.5 * xv.array() * (1.0 + th.array())).matrix();
  return t.record(std::move(out), {x}, [x, th = std::move(th)](Tape& t, const Matrix& g) {
    const auto xv = t.value(x).array();
    auto d = 0.5 * (1.0 + th.array()) +
             0.5 * xv * (1.0 - th.array().square()) * kC * (1.0 + 3.0 * kA * xv.square());
    t.grad(x).array() += g.array() * d;
  });
}

inline Var tanh(Tape& t, Var x) {
  Matrix out = t.value(x).array().tanh().matrix();
  return t.record(out, {x}, [x, out](Tape& t, const Matrix& g) {
    t.grad(x).array() += g.array() * (1.0 - out.array().square());
  });
}

// Row-wise layer normalisation with learned gain (1 x d) and bias (1 x d).
inline Var layer_norm(Tape& t, Var x, Var gain, Var bias, Real eps = 1e-5) {
  const Matrix& xv = t.value(x);
  const Eigen::Index n = xv.rows(), d = xv.cols();
  Matrix xhat(n, d);
  ColVector inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Real mean = xv.row(r).mean();
    const Real var = (xv.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (xv.row(r).array() - mean) * inv_std(r);
  }
  Matrix out = xhat;
  out.array().rowwise() *= t.value(gain).row(0).array();
  out.rowwise() += t.value(bias).row(0);
  return t.record(std::move(out), {x, gain, bias},
                  [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                      Tape& t, const Matrix& g) {
                    if (t.needs_grad(gain)) t.grad(gain) += (g.array() * xhat.array()).colwise().sum().matrix();
                    if (t.needs_grad(bias)) t.grad(bias) += g.colwise().sum();
                    if (!t.needs_grad(x)) return;
                    Matrix dxhat = g;
                    dxhat.array().rowwise() *= t.value(gain).row(0).array();
                    Matrix& gx = t.grad(x);
                    const Real d = static_cast<Real>(dxhat.cols());
                    for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
                      const Real m1 = dxhat.row(r).sum() / d;
                      const Real m2 = dxhat.row(r).dot(xhat.row(r)) / d;
                      gx.row(r).array() +=
                          inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
                    }
                  });
}

// out.row(r) = x.row(index[r]); gradients scatter-add back.
inline Var gather_rows(Tape& t, Var x, std::vector<int> index) {
  const Matrix& xv = t.value(x);
  Matrix out(static_cast<Eigen::Index>(index.size()), xv.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || index[r] >= xv.rows()) throw std::out_of_range("gather_rows index");
    out.row(static_cast<Eigen::Index>(r)) = xv.row(index[r]);
  }
  return t.record(std::move(out), {x}, [x, index = std::move(index)](Tape& t, const Matrix& g) {
    Matrix& gx = t.grad(x);
    for (std::size_t r = 0; r < index.size(); ++r) gx.row(index[r]) += g.row(static_cast<Eigen::Index>(r));
  });
}

// Row-major reinterpretation with the same element count.
inline Var reshape(Tape& t, Var x, Eigen::Index rows, Eigen::Index cols) {
  const Matrix& xv = t.value(x);
  if (rows * cols != xv.size()) throw std::invalid_argument("reshape size mismatch");
  const Eigen::Index r0 = xv.rows(), c0 = xv.cols();
  Matrix out = Eigen::Map<const Matrix>(xv.data(), rows, cols);
  return t.record(std::move(out), {x}, [x, r0, c0](Tape& t, const Matrix& g) {
    t.grad(x) += Eigen::Map<const Matrix>(g.data(), r0, c0);
  });
}

// Multi-head scaled dot-product attention over packed sequences. Query
// segment i attends to key segment i only; keys with valid[k] == 0 receive
// zero weight. q is Nq x d; k and v are Nk x d.
inline Var attention(Tape& t, Var q, Var k, Var v, const Segments& qseg, const Segments& kseg,
                     std::span<const std::uint8_t> key_valid, int heads) {
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  if (qseg.size() != kseg.size()) throw std::invalid_argument("attention segment count mismatch");
  if (qseg.rows() != qv.rows() || kseg.rows() != kv.rows() || kv.rows() != vv.rows() ||
      static_cast<Eigen::Index>(key_valid.size()) != kv.rows())
    throw std::invalid_argument("attention shape mismatch");
  const Eigen::Index d = qv.cols();
  if (d % heads != 0) throw std::invalid_argument("width not divisible by heads");
  const Eigen::Index dh = d / heads;
  const Real sc = 1.0 / std::sqrt(static_cast<Real>(dh));
  constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

  // Per-segment blocks are tiny, so products use coefficient-based kernels
  // instead of the blocked GEMM path.
  auto probs = std::make_shared<std::vector<Matrix>>();
  probs->reserve(static_cast<std::size_t>(qseg.size() * heads));
  Matrix out = Matrix::Zero(qv.rows(), d);
  for (int s = 0; s < qseg.size(); ++s) {
    const int qb = qseg.begin(s), nq = qseg.length(s);
    const int kb = kseg.begin(s), nk = kseg.length(s);
    bool any_valid = false;
    for (int j = 0; j < nk; ++j) any_valid = any_valid || key_valid[kb + j] != 0;
    if (nq > 0 && !any_valid) throw std::invalid_argument("attention over a fully masked segment");
    for (int h = 0; h < heads; ++h) {
      Matrix scores = qv.block(qb, h * dh, nq, dh).lazyProduct(kv.block(kb, h * dh, nk, dh).transpose()) * sc;
      for (int j = 0; j < nk; ++j)
        if (key_valid[kb + j] == 0) scores.col(j).setConstant(kNegInf);
      for (int i = 0; i < nq; ++i) {
        const Real mx = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - mx).exp().matrix();
        scores.row(i) /= scores.row(i).sum();
      }
      out.block(qb, h * dh, nq, dh).noalias() = scores.lazyProduct(vv.block(kb, h * dh, nk, dh));
      probs->push_back(std::move(scores));
    }
  }
  return t.record(std::move(out), {q, k, v},
                  [q, k, v, qseg, kseg, heads, dh, sc, probs](Tape& t, const Matrix& g) {
                    const Matrix& qv = t.value(q);
                    const Matrix& kv = t.value(k);
                    const Matrix& vv = t.value(v);
                    const bool gq = t.needs_grad(q), gk = t.needs_grad(k), gv = t.needs_grad(v);
                    std::size_t idx = 0;
                    for (int s = 0; s < qseg.size(); ++s) {
                      const int qb = qseg.begin(s), nq = qseg.length(s);
                      const int kb = kseg.begin(s), nk = kseg.length(s);
                      for (int h = 0; h < heads; ++h, ++idx) {
                        const Matrix& p = (*probs)[idx];
                        const auto go = g.block(qb, h * dh, nq, dh);
                        if (gv) t.grad(v).block(kb, h * dh, nk, dh).noalias() += p.transpose().lazyProduct(go);
                        if (!gq && !gk) continue;
                        Matrix dp = go.lazyProduct(vv.block(kb, h * dh, nk, dh).transpose());
                        ColVector rs = (dp.array() * p.array()).rowwise().sum();
                        Matrix ds = (p.array() * (dp.colwise() - rs).array()).matrix() * sc;
                        if (gq) t.grad(q).block(qb, h * dh, nq, dh).noalias() += ds.lazyProduct(kv.block(kb, h * dh, nk, dh));
                        if (gk) t.grad(k).block(kb, h * dh, nk, dh).noalias() += ds.transpose().lazyProduct(qv.block(qb, h * dh, nq, dh));
                      }
                    }
                  });
}

// Mean of the valid rows of every segment; nseg x d. A segment without valid
// rows pools to zero.
inline Var segment_mean(Tape& t, Var x, const Segments& seg, std::span<const std::uint8_t> valid) {
  const Matrix& xv = t.value(x);
  if (seg.rows() != xv.rows() || static_cast<Eigen::Index>(valid.size()) != xv.rows())
    throw std::invalid_argument("segment_mean shape mismatch");
  Matrix out = Matrix::Zero(seg.size(), xv.cols());
  std::vector<Real> inv_count(static_cast<std::size_t>(seg.size()), 0.0);
  for (int s = 0; s < seg.size(); ++s) {
    int n = 0;
    for (int r = seg.begin(s); r < seg.begin(s) + seg.length(s); ++r) {
      if (valid[r] == 0) continue;
      out.row(s) += xv.row(r);
      ++n;
    }
    if (n > 0) {
      inv_count[s] = 1.0 / n;
      out.row(s) *= inv_count[s];
    }
  }
  std::vector<std::uint8_t> mask(valid.begin(), valid.end());
  return t.record(std::move(out), {x},
                  [x, seg, mask = std::move(mask), inv_count = std::move(inv_count)](Tape& t, const Matrix& g) {
                    Matrix& gx = t.grad(x);
                    for (int s = 0; s < seg.size(); ++s)
                      for (int r = seg.begin(s); r < seg.begin(s) + seg.length(s); ++r)
                        if (mask[r] != 0) gx.row(r) += g.row(s) * inv_count[s];
                  });
}

// Pairwise cosine similarity: out(i, j) = cos(a.row(i), b.row(j)). A zero
// row yields similarity 0 and no gradient.
inline Var cosine_matrix(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.cols()) throw std::invalid_argument("cosine width mismatch");
  ColVector na = av.rowwise().norm();
  ColVector nb = bv.rowwise().norm();
  Matrix out = av * bv.transpose();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = (na(i) > 0 && nb(j) > 0) ? out(i, j) / (na(i) * nb(j)) : 0.0;
  return t.record(out, {a, b}, [a, b, na, nb, out](Tape& t, const Matrix& g) {
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    // d cos / d a_i = b_j / (|a_i||b_j|) - cos * a_i / |a_i|^2
    Matrix w = g;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        w(i, j) = (na(i) > 0 && nb(j) > 0) ? g(i, j) / (na(i) * nb(j)) : 0.0;
    if (t.needs_grad(a)) {
      Matrix& ga = t.grad(a);
      ga.noalias() += w * bv;
      for (Eigen::Index i = 0; i < av.rows(); ++i) {
        if (na(i) <= 0) continue;
        Real c = 0;
        for (Eigen::Index j = 0; j < w.cols(); ++j) c += (nb(j) > 0 ? g(i, j) * out(i, j) : 0.0);
        ga.row(i) -= c / (na(i) * na(i)) * av.row(i);
      }
    }
    if (t.needs_grad(b)) {
      Matrix& gb = t.grad(b);
      gb.noalias() += w.transpose() * av;
      for (Eigen::Index j = 0; j < bv.rows(); ++j) {
        if (nb(j) <= 0) continue;
        Real c = 0;
        for (Eigen::Index i = 0; i < w.rows(); ++i) c += (na(i) > 0 ? g(i, j) * out(i, j) : 0.0);
        gb.row(j) -= c / (nb(j) * nb(j)) * bv.row(j);
      }
    }
  });
}

// Row-wise softmax of a matrix (numerically stabilised).
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Real mx = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - mx).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

// Mean over rows of -log softmax(logits.row(r))[label[r]]; 1 x 1.
inline Var softmax_cross_entropy(Tape& t, Var logits, std::vector<int> labels) {
  const Matrix& lv = t.value(logits);
  if (static_cast<Eigen::Index>(labels.size()) != lv.rows()) throw std::invalid_argument("label count mismatch");
  Matrix p = softmax_rows(lv);
  Real loss = 0;
  for (Eigen::Index r = 0; r < lv.rows(); ++r) {
    const Real mx = lv.row(r).maxCoeff();
    const Real lse = mx + std::log((lv.row(r).array() - mx).exp().sum());
    loss -= lv(r, labels[r]) - lse;
  }
  const Real n = static_cast<Real>(std::max<Eigen::Index>(lv.rows(), 1));
  Matrix out(1, 1);
  out(0, 0) = loss / n;
  return t.record(std::move(out), {logits},
                  [logits, p = std::move(p), labels = std::move(labels), n](Tape& t, const Matrix& g) {
                    Matrix d = p;
                    for (std::size_t r = 0; r < labels.size(); ++r) d(static_cast<Eigen::Index>(r), labels[r]) -= 1.0;
                    t.grad(logits) += d * (g(0, 0) / n);
                  });
}

// Binary cross-entropy with logits, averaged over the valid rows of each
// segment. logits is N x 1; returns nseg x 1.
inline Var segment_bce(Tape& t, Var logits, std::vector<Real> targets, const Segments& seg,
                       std::span<const std::uint8_t> valid) {
  const Matrix& z = t.value(logits);
  if (z.cols() != 1 || z.rows() != seg.rows() || static_cast<int>(targets.size()) != seg.rows() ||
      static_cast<int>(valid.size()) != seg.rows())
    throw std::invalid_argument("segment_bce shape mismatch");
  Matrix out = Matrix::Zero(seg.size(), 1);
  std::vector<Real> inv_count(static_cast<std::size_t>(seg.size()), 0.0);
  for (int s = 0; s < seg.size(); ++s) {
    int n = 0;
    Real sum = 0;
    for (int r = seg.begin(s); r < seg.begin(s) + seg.length(s); ++r) {
      if (valid[r] == 0) continue;
      const Real x = z(r, 0);
      sum += std::max(x, 0.0) - x * targets[r] + std::log1p(std::exp(-std::abs(x)));
      ++n;
    }
    if (n > 0) {
      inv_count[s] = 1.0 / n;
      out(s, 0) = sum * inv_count[s];
    }
  }
  std::vector<std::uint8_t> mask(valid.begin(), valid.end());
  return t.record(std::move(out), {logits},
                  [logits, seg, mask = std::move(mask), targets = std::move(targets),
                   inv_count = std::move(inv_count)](Tape& t, const Matrix& g) {
                    const Matrix& z = t.value(logits);
                    Matrix& gz = t.grad(logits);
                    for (int s = 0; s < seg.size(); ++s)
                      for (int r = seg.begin(s); r < seg.begin(s) + seg.length(s); ++r) {
                        if (mask[r] == 0) continue;
                        const Real sig = 1.0 / (1.0 + std::exp(-z(r, 0)));
                        gz(r, 0) += g(s, 0) * inv_count[s] * (sig - targets[r]);
                      }
                  });
}

inline Var mean_all(Tape& t, Var x) {
  const Matrix& xv = t.value(x);
  const Real n = static_cast<Real>(std::max<Eigen::Index>(xv.size(), 1));
  Matrix out(1, 1);
  out(0, 0) = xv.sum() / n;
  return t.record(std::move(out), {x}, [x, n](Tape& t, const Matrix& g) {
    t.grad(x).array() += g(0, 0) / n;
  });
}

// Mean over rows of sum_i softmax(logits.row(r))_i * costs(r, i); 1 x 1.
// With detach_weights the softmax weights are treated as constants.
inline Var softmax_weighted_cost(Tape& t, Var logits, Var costs, bool detach_weights = false) {
  const Matrix& lv = t.value(logits);
  const Matrix& cv = t.value(costs);
  if (lv.rows() != cv.rows() || lv.cols() != cv.cols()) throw std::invalid_argument("weighted cost shape mismatch");
  Matrix alpha = softmax_rows(lv);
  const Real n = static_cast<Real>(std::max<Eigen::Index>(lv.rows(), 1));
  Matrix out(1, 1);
  out(0, 0) = (alpha.array() * cv.array()).sum() / n;
  return t.record(std::move(out), {logits, costs},
                  [logits, costs, alpha = std::move(alpha), n, detach_weights](Tape& t, const Matrix& g) {
                    const Real s = g(0, 0) / n;
                    if (t.needs_grad(costs)) t.grad(costs) += alpha * s;
                    if (detach_weights || !t.needs_grad(logits)) return;
                    const Matrix& cv = t.value(costs);
                    ColVector expected = (alpha.array() * cv.array()).rowwise().sum();
                    t.grad(logits) += (alpha.array() * (cv.colwise() - expected).array()).matrix() * s;
                  });
}

}  // namespace ops
}  // namespace samie

// uase/autodiff.cc
//
// Copyright 2026  uase authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include "uase/autodiff.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uase {
namespace ad {

Tensor Graph::Input(Matrix value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Tensor{static_cast<int>(nodes_.size()) - 1};
}

int Graph::AddNode(Matrix value, const std::vector<int> &parents,
                   BackpropFn fn) {
  Node node;
  node.value = std::move(value);
  for (int p : parents)
    if (nodes_[p].requires_grad) node.requires_grad = true;
  if (node.requires_grad) node.backprop = std::move(fn);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::Accumulate(int id, const Matrix &delta) {
  AccumulateScaled(id, delta, 1.0);
}

void Graph::AccumulateScaled(int id, const Matrix &delta, double alpha) {
  Node &node = nodes_[id];
  if (!node.requires_grad) return;
  if (node.grad.Empty())
    node.grad = Matrix(node.value.Rows(), node.value.Cols());
  node.grad.AddScaled(delta, alpha);
}

const Matrix &Graph::Grad(Tensor t) const {
  const Node &node = nodes_[t.id];
  if (node.grad.Empty()) {
    static const Matrix kEmpty;
    if (node.value.Empty()) return kEmpty;
    // Zero grad of the right shape for nodes untouched by the sweep.
    const_cast<Node &>(node).grad = Matrix(node.value.Rows(), node.value.Cols());
  }
  return node.grad;
}

void Graph::Backward(Tensor root) {
  if (backward_done_) throw std::logic_error("Graph::Backward called twice");
  backward_done_ = true;
  Node &r = nodes_[root.id];
  if (r.value.Rows() != 1 || r.value.Cols() != 1)
    throw std::invalid_argument("Graph::Backward: root must be 1x1");
  r.grad = Matrix(1, 1, {1.0});
  for (int id = root.id; id >= 0; --id) {
    Node &node = nodes_[id];
    if (!node.requires_grad || node.grad.Empty() || !node.backprop) continue;
    node.backprop(*this, id);
  }
}

namespace {

Matrix EwOp(const Matrix &a, const Matrix &b, double (*op)(double, double)) {
  if (!a.SameShape(b))
    throw std::invalid_argument("autodiff: elementwise shape mismatch");
  Matrix out(a.Rows(), a.Cols());
  for (size_t i = 0; i < a.Size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

}  // namespace

Tensor Add(Graph &g, Tensor a, Tensor b) {
  Matrix v = EwOp(g.Value(a), g.Value(b), [](double x, double y) { return x + y; });
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    g.Accumulate(a.id, g.GradOf(self));
    g.Accumulate(b.id, g.GradOf(self));
  });
  return Tensor{id};
}

Tensor Sub(Graph &g, Tensor a, Tensor b) {
  Matrix v = EwOp(g.Value(a), g.Value(b), [](double x, double y) { return x - y; });
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    g.Accumulate(a.id, g.GradOf(self));
    g.AccumulateScaled(b.id, g.GradOf(self), -1.0);
  });
  return Tensor{id};
}

Tensor Mul(Graph &g, Tensor a, Tensor b) {
  Matrix v = EwOp(g.Value(a), g.Value(b), [](double x, double y) { return x * y; });
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    const Matrix &bv = g.ValueOf(b.id);
    Matrix da(av.Rows(), av.Cols()), db(av.Rows(), av.Cols());
    for (size_t i = 0; i < go.Size(); ++i) {
      da[i] = go[i] * bv[i];
      db[i] = go[i] * av[i];
    }
    g.Accumulate(a.id, da);
    g.Accumulate(b.id, db);
  });
  return Tensor{id};
}

Tensor Div(Graph &g, Tensor a, Tensor b) {
  Matrix v = EwOp(g.Value(a), g.Value(b), [](double x, double y) { return x / y; });
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    const Matrix &bv = g.ValueOf(b.id);
    Matrix da(av.Rows(), av.Cols()), db(av.Rows(), av.Cols());
    for (size_t i = 0; i < go.Size(); ++i) {
      da[i] = go[i] / bv[i];
      db[i] = -go[i] * av[i] / (bv[i] * bv[i]);
    }
    g.Accumulate(a.id, da);
    g.Accumulate(b.id, db);
  });
  return Tensor{id};
}

Tensor AddConst(Graph &g, Tensor a, const Matrix &c) {
  Matrix v = EwOp(g.Value(a), c, [](double x, double y) { return x + y; });
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    g.Accumulate(a.id, g.GradOf(self));
  });
  return Tensor{id};
}

Tensor MulConst(Graph &g, Tensor a, const Matrix &c) {
  Matrix v = EwOp(g.Value(a), c, [](double x, double y) { return x * y; });
  Matrix cc = c;
  int id = g.AddNode(std::move(v), {a.id},
                     [a, cc = std::move(cc)](Graph &g, int self) {
                       const Matrix &go = g.GradOf(self);
                       Matrix da(go.Rows(), go.Cols());
                       for (size_t i = 0; i < go.Size(); ++i)
                         da[i] = go[i] * cc[i];
                       g.Accumulate(a.id, da);
                     });
  return Tensor{id};
}

Tensor Scale(Graph &g, Tensor a, double c) {
  Matrix v = g.Value(a);
  v.Scale(c);
  int id = g.AddNode(std::move(v), {a.id}, [a, c](Graph &g, int self) {
    g.AccumulateScaled(a.id, g.GradOf(self), c);
  });
  return Tensor{id};
}

Tensor AddScalar(Graph &g, Tensor a, double c) {
  Matrix v = g.Value(a);
  for (size_t i = 0; i < v.Size(); ++i) v[i] += c;
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    g.Accumulate(a.id, g.GradOf(self));
  });
  return Tensor{id};
}

Tensor AddRowVec(Graph &g, Tensor x, Tensor row) {
  const Matrix &xv = g.Value(x);
  const Matrix &rv = g.Value(row);
  if (rv.Rows() != 1 || rv.Cols() != xv.Cols())
    throw std::invalid_argument("AddRowVec: shape mismatch");
  Matrix v(xv.Rows(), xv.Cols());
  for (int r = 0; r < xv.Rows(); ++r)
    for (int c = 0; c < xv.Cols(); ++c) v(r, c) = xv(r, c) + rv(0, c);
  int id = g.AddNode(std::move(v), {x.id, row.id}, [x, row](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    g.Accumulate(x.id, go);
    Matrix dr(1, go.Cols());
    for (int r = 0; r < go.Rows(); ++r)
      for (int c = 0; c < go.Cols(); ++c) dr(0, c) += go(r, c);
    g.Accumulate(row.id, dr);
  });
  return Tensor{id};
}

Tensor BroadcastCols(Graph &g, Tensor col, int cols) {
  const Matrix &cv = g.Value(col);
  if (cv.Cols() != 1) throw std::invalid_argument("BroadcastCols: need Tx1");
  Matrix v(cv.Rows(), cols);
  for (int r = 0; r < cv.Rows(); ++r)
    for (int c = 0; c < cols; ++c) v(r, c) = cv(r, 0);
  int id = g.AddNode(std::move(v), {col.id}, [col](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    Matrix dc(go.Rows(), 1);
    for (int r = 0; r < go.Rows(); ++r)
      for (int c = 0; c < go.Cols(); ++c) dc(r, 0) += go(r, c);
    g.Accumulate(col.id, dc);
  });
  return Tensor{id};
}

Tensor BroadcastRows(Graph &g, Tensor row, int rows) {
  const Matrix &rv = g.Value(row);
  if (rv.Rows() != 1) throw std::invalid_argument("BroadcastRows: need 1xD");
  Matrix v(rows, rv.Cols());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < rv.Cols(); ++c) v(r, c) = rv(0, c);
  int id = g.AddNode(std::move(v), {row.id}, [row](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    Matrix dr(1, go.Cols());
    for (int r = 0; r < go.Rows(); ++r)
      for (int c = 0; c < go.Cols(); ++c) dr(0, c) += go(r, c);
    g.Accumulate(row.id, dr);
  });
  return Tensor{id};
}

Tensor ScalarMul(Graph &g, Tensor scalar, Tensor x) {
  const Matrix &sv = g.Value(scalar);
  if (sv.Rows() != 1 || sv.Cols() != 1)
    throw std::invalid_argument("ScalarMul: scalar must be 1x1");
  Matrix v = g.Value(x);
  v.Scale(sv(0, 0));
  int id = g.AddNode(std::move(v), {scalar.id, x.id},
                     [scalar, x](Graph &g, int self) {
                       const Matrix &go = g.GradOf(self);
                       const Matrix &xv = g.ValueOf(x.id);
                       double s = g.ValueOf(scalar.id)(0, 0);
                       g.AccumulateScaled(x.id, go, s);
                       Matrix ds(1, 1);
                       for (size_t i = 0; i < go.Size(); ++i)
                         ds[0] += go[i] * xv[i];
                       g.Accumulate(scalar.id, ds);
                     });
  return Tensor{id};
}

Tensor MatMul(Graph &g, Tensor a, Tensor b) {
  Matrix v = g.Value(a).MatMul(g.Value(b));
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    // dA = G * B^T, dB = A^T * G
    g.Accumulate(a.id, go.MatMulNT(g.ValueOf(b.id)));
    g.Accumulate(b.id, g.ValueOf(a.id).MatMulTN(go));
  });
  return Tensor{id};
}

Tensor MatMulNT(Graph &g, Tensor a, Tensor b) {
  Matrix v = g.Value(a).MatMulNT(g.Value(b));
  int id = g.AddNode(std::move(v), {a.id, b.id}, [a, b](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    // C = A B^T: dA = G * B, dB = G^T * A
    g.Accumulate(a.id, go.MatMul(g.ValueOf(b.id)));
    g.Accumulate(b.id, go.MatMulTN(g.ValueOf(a.id)));
  });
  return Tensor{id};
}

namespace {

template <typename Fwd, typename Bwd>
Tensor Unary(Graph &g, Tensor a, Fwd fwd, Bwd bwd) {
  const Matrix &av = g.Value(a);
  Matrix v(av.Rows(), av.Cols());
  for (size_t i = 0; i < av.Size(); ++i) v[i] = fwd(av[i]);
  int id = g.AddNode(std::move(v), {a.id}, [a, bwd](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    const Matrix &yv = g.ValueOf(self);
    Matrix da(go.Rows(), go.Cols());
    for (size_t i = 0; i < go.Size(); ++i) da[i] = go[i] * bwd(av[i], yv[i]);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

}  // namespace

Tensor Relu(Graph &g, Tensor a) {
  return Unary(
      g, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor Softplus(Graph &g, Tensor a) {
  return Unary(
      g, a,
      [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor Exp(Graph &g, Tensor a) {
  return Unary(
      g, a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor Log(Graph &g, Tensor a) {
  return Unary(
      g, a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor Sqrt(Graph &g, Tensor a) {
  return Unary(
      g, a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / std::max(y, 1e-150); });
}

Tensor Abs(Graph &g, Tensor a) {
  return Unary(
      g, a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor Rsqrt(Graph &g, Tensor a, double eps) {
  return Unary(
      g, a, [eps](double x) { return 1.0 / std::sqrt(x + eps); },
      [eps](double x, double y) { return -0.5 * y / (x + eps); });
}

Tensor SinFromCos(Graph &g, Tensor c) {
  return Unary(
      g, c,
      [](double x) { return std::sqrt(std::max(1.0 - x * x, 0.0)); },
      [](double x, double y) { return -x / std::max(y, 1e-12); });
}

Tensor RowSum(Graph &g, Tensor a) {
  const Matrix &av = g.Value(a);
  Matrix v(av.Rows(), 1);
  for (int r = 0; r < av.Rows(); ++r)
    for (int c = 0; c < av.Cols(); ++c) v(r, 0) += av(r, c);
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    Matrix da(av.Rows(), av.Cols());
    for (int r = 0; r < av.Rows(); ++r)
      for (int c = 0; c < av.Cols(); ++c) da(r, c) = go(r, 0);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor ColSum(Graph &g, Tensor a) {
  const Matrix &av = g.Value(a);
  Matrix v(1, av.Cols());
  for (int r = 0; r < av.Rows(); ++r)
    for (int c = 0; c < av.Cols(); ++c) v(0, c) += av(r, c);
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    Matrix da(av.Rows(), av.Cols());
    for (int r = 0; r < av.Rows(); ++r)
      for (int c = 0; c < av.Cols(); ++c) da(r, c) = go(0, c);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor SumAll(Graph &g, Tensor a) {
  const Matrix &av = g.Value(a);
  double acc = 0.0;
  for (size_t i = 0; i < av.Size(); ++i) acc += av[i];
  int id = g.AddNode(Matrix(1, 1, {acc}), {a.id}, [a](Graph &g, int self) {
    double go = g.GradOf(self)(0, 0);
    const Matrix &av = g.ValueOf(a.id);
    Matrix da(av.Rows(), av.Cols(), go);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor RowSoftmax(Graph &g, Tensor a) {
  const Matrix &av = g.Value(a);
  Matrix v(av.Rows(), av.Cols());
  for (int r = 0; r < av.Rows(); ++r) {
    double mx = av(r, 0);
    for (int c = 1; c < av.Cols(); ++c) mx = std::max(mx, av(r, c));
    double sum = 0.0;
    for (int c = 0; c < av.Cols(); ++c) {
      v(r, c) = std::exp(av(r, c) - mx);
      sum += v(r, c);
    }
    for (int c = 0; c < av.Cols(); ++c) v(r, c) /= sum;
  }
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &y = g.ValueOf(self);
    Matrix da(y.Rows(), y.Cols());
    for (int r = 0; r < y.Rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < y.Cols(); ++c) dot += go(r, c) * y(r, c);
      for (int c = 0; c < y.Cols(); ++c)
        da(r, c) = y(r, c) * (go(r, c) - dot);
    }
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor LogSumExpRow(Graph &g, Tensor a) {
  const Matrix &av = g.Value(a);
  if (av.Rows() != 1) throw std::invalid_argument("LogSumExpRow: need 1xN");
  double mx = av(0, 0);
  for (int c = 1; c < av.Cols(); ++c) mx = std::max(mx, av(0, c));
  double sum = 0.0;
  for (int c = 0; c < av.Cols(); ++c) sum += std::exp(av(0, c) - mx);
  double lse = mx + std::log(sum);
  int id = g.AddNode(Matrix(1, 1, {lse}), {a.id}, [a, lse](Graph &g, int self) {
    double go = g.GradOf(self)(0, 0);
    const Matrix &av = g.ValueOf(a.id);
    Matrix da(1, av.Cols());
    for (int c = 0; c < av.Cols(); ++c)
      da(0, c) = go * std::exp(av(0, c) - lse);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor Transpose(Graph &g, Tensor a) {
  Matrix v = g.Value(a).Transpose();
  int id = g.AddNode(std::move(v), {a.id}, [a](Graph &g, int self) {
    g.Accumulate(a.id, g.GradOf(self).Transpose());
  });
  return Tensor{id};
}

Tensor SliceCols(Graph &g, Tensor a, int begin, int count) {
  const Matrix &av = g.Value(a);
  if (begin < 0 || begin + count > av.Cols())
    throw std::invalid_argument("SliceCols: range out of bounds");
  Matrix v(av.Rows(), count);
  for (int r = 0; r < av.Rows(); ++r)
    for (int c = 0; c < count; ++c) v(r, c) = av(r, begin + c);
  int id = g.AddNode(std::move(v), {a.id}, [a, begin, count](Graph &g, int self) {
    const Matrix &go = g.GradOf(self);
    const Matrix &av = g.ValueOf(a.id);
    Matrix da(av.Rows(), av.Cols());
    for (int r = 0; r < av.Rows(); ++r)
      for (int c = 0; c < count; ++c) da(r, begin + c) = go(r, c);
    g.Accumulate(a.id, da);
  });
  return Tensor{id};
}

Tensor ConcatCols(Graph &g, const std::vector<Tensor> &parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: empty");
  int rows = g.Value(parts[0]).Rows();
  int cols = 0;
  for (Tensor t : parts) {
    if (g.Value(t).Rows() != rows)
      throw std::invalid_argument("ConcatCols: row mismatch");
    cols += g.Value(t).Cols();
  }
  Matrix v(rows, cols);
  int off = 0;
  std::vector<int> ids;
  std::vector<int> widths;
  for (Tensor t : parts) {
    const Matrix &pv = g.Value(t);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < pv.Cols(); ++c) v(r, off + c) = pv(r, c);
    ids.push_back(t.id);
    widths.push_back(pv.Cols());
    off += pv.Cols();
  }
  int id = g.AddNode(std::move(v), ids,
                     [ids, widths, rows](Graph &g, int self) {
                       const Matrix &go = g.GradOf(self);
                       int off = 0;
                       for (size_t p = 0; p < ids.size(); ++p) {
                         Matrix dp(rows, widths[p]);
                         for (int r = 0; r < rows; ++r)
                           for (int c = 0; c < widths[p]; ++c)
                             dp(r, c) = go(r, off + c);
                         g.Accumulate(ids[p], dp);
                         off += widths[p];
                       }
                     });
  return Tensor{id};
}

}  // namespace ad
}  // namespace uase

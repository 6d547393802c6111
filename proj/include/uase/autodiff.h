// uase/autodiff.h
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

#ifndef UASE_AUTODIFF_H_
#define UASE_AUTODIFF_H_

#include <functional>
#include <vector>

#include "uase/matrix.h"

namespace uase {
namespace ad {

// Reverse-mode automatic differentiation on Matrix-valued nodes.  A Graph is
// a single-use tape: build the forward computation, call Backward once on a
// 1x1 root, then read gradients of the inputs.  Graphs are cheap; training
// builds one per sample per step.

struct Tensor {
  int id = -1;
};

class Graph {
 public:
  Tensor Input(Matrix value, bool requires_grad = false);

  const Matrix &Value(Tensor t) const { return nodes_[t.id].value; }
  const Matrix &Grad(Tensor t) const;
  bool RequiresGrad(Tensor t) const { return nodes_[t.id].requires_grad; }

  /// Seeds the root (must be 1x1) with gradient 1 and sweeps the tape in
  /// reverse.  May be called once per graph.
  void Backward(Tensor root);

  size_t NumNodes() const { return nodes_.size(); }

  // Used by op builders.
  using BackpropFn = std::function<void(Graph &, int self)>;
  int AddNode(Matrix value, const std::vector<int> &parents, BackpropFn fn);
  const Matrix &ValueOf(int id) const { return nodes_[id].value; }
  const Matrix &GradOf(int id) const { return nodes_[id].grad; }
  /// Accumulates delta into the gradient of `id` if it requires grad.
  void Accumulate(int id, const Matrix &delta);
  void AccumulateScaled(int id, const Matrix &delta, double alpha);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackpropFn backprop;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Elementwise (same-shape) arithmetic.
Tensor Add(Graph &g, Tensor a, Tensor b);
Tensor Sub(Graph &g, Tensor a, Tensor b);
Tensor Mul(Graph &g, Tensor a, Tensor b);
Tensor Div(Graph &g, Tensor a, Tensor b);

// Constants (no gradient through the constant operand).
Tensor AddConst(Graph &g, Tensor a, const Matrix &c);
Tensor MulConst(Graph &g, Tensor a, const Matrix &c);
Tensor Scale(Graph &g, Tensor a, double c);
Tensor AddScalar(Graph &g, Tensor a, double c);

// Broadcasting.
Tensor AddRowVec(Graph &g, Tensor x, Tensor row);          // (TxD) + (1xD)
Tensor BroadcastCols(Graph &g, Tensor col, int cols);      // (Tx1) -> (TxD)
Tensor BroadcastRows(Graph &g, Tensor row, int rows);      // (1xD) -> (TxD)
Tensor ScalarMul(Graph &g, Tensor scalar, Tensor x);       // (1x1) * (TxD)

// Linear algebra.
Tensor MatMul(Graph &g, Tensor a, Tensor b);    // a * b
Tensor MatMulNT(Graph &g, Tensor a, Tensor b);  // a * b^T

// Elementwise nonlinearities.
Tensor Relu(Graph &g, Tensor a);
Tensor Softplus(Graph &g, Tensor a);
Tensor Exp(Graph &g, Tensor a);
Tensor Log(Graph &g, Tensor a);
Tensor Sqrt(Graph &g, Tensor a);
Tensor Abs(Graph &g, Tensor a);
Tensor Rsqrt(Graph &g, Tensor a, double eps = 0.0);  // 1/sqrt(x+eps)

/// sqrt(max(1 - c^2, 0)) with gradient -c / max(sqrt(1-c^2), 1e-12); the sine
/// matching a cosine in [-1, 1].
Tensor SinFromCos(Graph &g, Tensor c);

// Reductions.
Tensor RowSum(Graph &g, Tensor a);  // (TxD) -> (Tx1)
Tensor ColSum(Graph &g, Tensor a);  // (TxD) -> (1xD)
Tensor SumAll(Graph &g, Tensor a);  // -> (1x1)

/// Row-wise stable softmax.
Tensor RowSoftmax(Graph &g, Tensor a);

/// Stable log sum exp of a 1xN row -> 1x1.
Tensor LogSumExpRow(Graph &g, Tensor a);

// Shape surgery.
Tensor Transpose(Graph &g, Tensor a);
Tensor SliceCols(Graph &g, Tensor a, int begin, int count);
Tensor ConcatCols(Graph &g, const std::vector<Tensor> &parts);

}  // namespace ad
}  // namespace uase

#endif  // UASE_AUTODIFF_H_

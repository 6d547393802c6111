// uase/losses.h
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

#ifndef UASE_LOSSES_H_
#define UASE_LOSSES_H_

#include <map>
#include <string>
#include <vector>

#include "uase/autodiff.h"
#include "uase/encoder.h"
#include "uase/matrix.h"

namespace uase {

// Classification and uncertainty-supervision objectives: plain softmax CE,
// additive-angular-margin softmax, the variance-supervision loss against
// speaker centroids with its epoch-gated weight, and the uncertainty-aware
// variant whose logits are modulated by a per-sample Mahalanobis scale.

struct ClassifierWeights {
  Matrix W;  // C x d_out; rows are l2-normalized by the margin losses
  Matrix b;  // 1 x C; used only by the plain softmax CE
};

struct MarginScheduleConfig {
  double m_max = 0.2;
  int start_epoch = 20;
  int end_epoch = 40;
};

enum class CentroidMode { kPre, kEpoch };

struct SVLConfig {
  double lambda = 0.05;
  int psi_svl = 40;
  int psi_max = 150;
  double alpha = 1.0;  // learnable uncertainty scaling factor, init 1
  CentroidMode centroid_mode = CentroidMode::kEpoch;
};

struct LambdaVariant {
  enum Tag { kIdentity, kOneMinusDcos, kHalfMinusDcos, kConstMinusDcos };
  Tag tag = Tag::kIdentity;
  double c = 0.5;        // used by kConstMinusDcos
  double floor = 1e-6;   // clamp keeping the diagonal non-negative
};

struct CentroidTable {
  std::map<int, Matrix> centroid;  // speaker -> 1 x d_out mean embedding
  std::map<int, int> count;
};

double SoftmaxCeLoss(const Matrix &phi_s, int label,
                     const ClassifierWeights &weights);

double AamLoss(const Matrix &phi_s, int label, const ClassifierWeights &weights,
               double s, double m);

/// 0 before start_epoch, linear up to m_max at end_epoch, then flat.
double MarginAt(int epoch, const MarginScheduleConfig &cfg);

/// cos(theta_label) - max_{j != label} cos(theta_j).  Detached: callers must
/// treat the result as a constant; no gradient path exists through it.
double DeltaCos(const Matrix &phi_s, int label,
                const ClassifierWeights &weights);

/// Diagonal bias term from the variant and a (detached) difficulty value.
/// Clamped at `floor`; increments *clamp_count once per clamp event if
/// non-null.
Matrix LambdaDiag(const LambdaVariant &variant, double dcos, int d,
                  int *clamp_count);

/// s_u = |phi| / sqrt(phi^T (Lambda + Sigma) phi), diagonal quadratic form.
double UncertaintyScale(const Matrix &phi_s, const Matrix &sigma_s,
                        const Matrix &lambda_diag);

/// Reference form with the explicit inverse: sqrt(phi^T (Lambda+Sigma)^-1
/// phi) / |phi|, diagonal inverse.
double ExactMahalanobisScale(const Matrix &phi_s, const Matrix &sigma_s,
                             const Matrix &lambda_diag);

struct UaamResult {
  double loss = 0.0;
  double s_u = 1.0;
  double dcos = 0.0;
  int clamp_count = 0;
};

/// Margin softmax with every logit multiplied by s * s_u.
UaamResult UaamLoss(const Matrix &phi_s, const Matrix &sigma_s, int label,
                    const ClassifierWeights &weights, double s, double m,
                    const LambdaVariant &variant);

struct SvlSample {
  Matrix phi_s;    // 1 x d_out
  Matrix sigma_s;  // 1 x d_out
  int label = 0;
};

/// Mean over the batch of || alpha * sqrt(Sigma) - |phi - centroid| ||^2,
/// elementwise sqrt and abs.  Throws naming the speaker on a missing centroid.
double SvlLoss(const std::vector<SvlSample> &batch,
               const CentroidTable &centroids, double alpha);

/// 0 while epoch <= psi_svl, then lambda * (epoch - psi_svl)/(psi_max -
/// psi_svl).
double KappaAt(int epoch, const SVLConfig &cfg);

double TotalLoss(double classification_loss, double svl, int epoch,
                 const SVLConfig &cfg);

/// Per-speaker arithmetic mean of embeddings.  Speakers with no utterances
/// are simply absent from the table.
CentroidTable BuildCentroids(const std::vector<Matrix> &embeddings,
                             const std::vector<int> &labels);

// ---- Tape-side builders (training path) ----

/// AAM / UAAM sample loss on the tape.  `sigma_s` may be an invalid tensor
/// when `uncertainty_aware` is false.  `lambda_diag` is the already-clamped
/// diagonal built from the detached difficulty value.
ad::Tensor MarginLossGraph(ad::Graph *g, ad::Tensor phi_s, ad::Tensor sigma_s,
                           int label, ad::Tensor W, double s, double m,
                           bool uncertainty_aware, const Matrix &lambda_diag);

/// Single-sample contribution to the variance-supervision loss.
ad::Tensor SvlSampleGraph(ad::Graph *g, ad::Tensor phi_s, ad::Tensor sigma_s,
                          ad::Tensor alpha, const Matrix &centroid);

}  // namespace uase

#endif  // UASE_LOSSES_H_

// uase/losses.cc
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

#include "uase/losses.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uase/stats.h"

namespace uase {

namespace {

void CheckLabel(int label, int C) {
  if (label < 0 || label >= C)
    throw std::out_of_range("loss: label out of range");
}

/// Cosines between the l2-normalized embedding and l2-normalized weight rows.
std::vector<double> Cosines(const Matrix &phi_s,
                            const ClassifierWeights &weights) {
  double pn = Norm(phi_s);
  if (pn == 0.0) throw std::invalid_argument("loss: zero-norm embedding");
  int C = weights.W.Rows();
  std::vector<double> cos(C);
  for (int j = 0; j < C; ++j) {
    double wn = 0.0, dot = 0.0;
    for (int c = 0; c < weights.W.Cols(); ++c) {
      wn += weights.W(j, c) * weights.W(j, c);
      dot += weights.W(j, c) * phi_s(0, c);
    }
    if (wn == 0.0) throw std::invalid_argument("loss: zero-norm weight row");
    cos[j] = dot / (pn * std::sqrt(wn));
  }
  return cos;
}

double CeOnLogits(const std::vector<double> &logits, int label) {
  return LogSumExp(logits) - logits[label];
}

}  // namespace

double SoftmaxCeLoss(const Matrix &phi_s, int label,
                     const ClassifierWeights &weights) {
  int C = weights.W.Rows();
  CheckLabel(label, C);
  std::vector<double> logits(C);
  for (int j = 0; j < C; ++j) {
    double dot = weights.b.Empty() ? 0.0 : weights.b(0, j);
    for (int c = 0; c < weights.W.Cols(); ++c)
      dot += weights.W(j, c) * phi_s(0, c);
    logits[j] = dot;
  }
  return CeOnLogits(logits, label);
}

double AamLoss(const Matrix &phi_s, int label, const ClassifierWeights &weights,
               double s, double m) {
  int C = weights.W.Rows();
  CheckLabel(label, C);
  if (s <= 0.0) throw std::invalid_argument("AamLoss: scale must be positive");
  std::vector<double> cos = Cosines(phi_s, weights);
  std::vector<double> logits(C);
  for (int j = 0; j < C; ++j) logits[j] = s * cos[j];
  double cy = cos[label];
  double sy = std::sqrt(std::max(1.0 - cy * cy, 0.0));
  logits[label] = s * (cy * std::cos(m) - sy * std::sin(m));
  return CeOnLogits(logits, label);
}

double MarginAt(int epoch, const MarginScheduleConfig &cfg) {
  if (epoch < 0) throw std::invalid_argument("MarginAt: negative epoch");
  if (epoch <= cfg.start_epoch) return 0.0;
  if (epoch >= cfg.end_epoch) return cfg.m_max;
  return cfg.m_max * static_cast<double>(epoch - cfg.start_epoch) /
         (cfg.end_epoch - cfg.start_epoch);
}

double DeltaCos(const Matrix &phi_s, int label,
                const ClassifierWeights &weights) {
  int C = weights.W.Rows();
  if (C < 2) throw std::invalid_argument("DeltaCos: need C >= 2");
  CheckLabel(label, C);
  std::vector<double> cos = Cosines(phi_s, weights);
  double best_other = -2.0;
  for (int j = 0; j < C; ++j)
    if (j != label) best_other = std::max(best_other, cos[j]);
  return cos[label] - best_other;
}

Matrix LambdaDiag(const LambdaVariant &variant, double dcos, int d,
                  int *clamp_count) {
  double value = 1.0;
  switch (variant.tag) {
    case LambdaVariant::kIdentity:
      value = 1.0;
      break;
    case LambdaVariant::kOneMinusDcos:
      value = 1.0 - dcos;
      break;
    case LambdaVariant::kHalfMinusDcos:
      value = 0.5 - dcos;
      break;
    case LambdaVariant::kConstMinusDcos:
      value = variant.c - dcos;
      break;
  }
  if (value < variant.floor) {
    value = variant.floor;
    if (clamp_count) *clamp_count += 1;
  }
  return Matrix(1, d, value);
}

double UncertaintyScale(const Matrix &phi_s, const Matrix &sigma_s,
                        const Matrix &lambda_diag) {
  double pn2 = Dot(phi_s, phi_s);
  if (pn2 == 0.0)
    throw std::invalid_argument("UncertaintyScale: zero-norm embedding");
  double quad = 0.0;
  for (int c = 0; c < phi_s.Cols(); ++c) {
    double metric = lambda_diag(0, c) + sigma_s(0, c);
    if (metric <= 0.0)
      throw std::invalid_argument("UncertaintyScale: nonpositive metric entry");
    quad += phi_s(0, c) * phi_s(0, c) * metric;
  }
  if (quad <= 0.0)
    throw std::invalid_argument("UncertaintyScale: nonpositive quadratic form");
  return std::sqrt(pn2) / std::sqrt(quad);
}

double ExactMahalanobisScale(const Matrix &phi_s, const Matrix &sigma_s,
                             const Matrix &lambda_diag) {
  double pn2 = Dot(phi_s, phi_s);
  if (pn2 == 0.0)
    throw std::invalid_argument("ExactMahalanobisScale: zero-norm embedding");
  double quad = 0.0;
  for (int c = 0; c < phi_s.Cols(); ++c) {
    double metric = lambda_diag(0, c) + sigma_s(0, c);
    if (metric == 0.0)
      throw std::invalid_argument("ExactMahalanobisScale: zero diagonal entry");
    quad += phi_s(0, c) * phi_s(0, c) / metric;
  }
  return std::sqrt(quad) / std::sqrt(pn2);
}

UaamResult UaamLoss(const Matrix &phi_s, const Matrix &sigma_s, int label,
                    const ClassifierWeights &weights, double s, double m,
                    const LambdaVariant &variant) {
  int C = weights.W.Rows();
  CheckLabel(label, C);
  UaamResult result;
  result.dcos = DeltaCos(phi_s, label, weights);
  Matrix lam = LambdaDiag(variant, result.dcos, phi_s.Cols(),
                          &result.clamp_count);
  result.s_u = UncertaintyScale(phi_s, sigma_s, lam);
  std::vector<double> cos = Cosines(phi_s, weights);
  double eff = s * result.s_u;
  std::vector<double> logits(C);
  for (int j = 0; j < C; ++j) logits[j] = eff * cos[j];
  double cy = cos[label];
  double sy = std::sqrt(std::max(1.0 - cy * cy, 0.0));
  logits[label] = eff * (cy * std::cos(m) - sy * std::sin(m));
  result.loss = CeOnLogits(logits, label);
  return result;
}

double SvlLoss(const std::vector<SvlSample> &batch,
               const CentroidTable &centroids, double alpha) {
  if (batch.empty()) throw std::invalid_argument("SvlLoss: empty batch");
  double total = 0.0;
  for (const SvlSample &sample : batch) {
    auto it = centroids.centroid.find(sample.label);
    if (it == centroids.centroid.end())
      throw std::invalid_argument("SvlLoss: missing centroid for speaker " +
                                  std::to_string(sample.label));
    const Matrix &c = it->second;
    double acc = 0.0;
    for (int i = 0; i < sample.phi_s.Cols(); ++i) {
      double diff = alpha * std::sqrt(sample.sigma_s(0, i)) -
                    std::fabs(sample.phi_s(0, i) - c(0, i));
      acc += diff * diff;
    }
    total += acc;
  }
  return total / batch.size();
}

double KappaAt(int epoch, const SVLConfig &cfg) {
  if (cfg.psi_svl >= cfg.psi_max)
    throw std::invalid_argument("KappaAt: psi_svl must be < psi_max");
  if (epoch <= cfg.psi_svl) return 0.0;
  return cfg.lambda * static_cast<double>(epoch - cfg.psi_svl) /
         (cfg.psi_max - cfg.psi_svl);
}

double TotalLoss(double classification_loss, double svl, int epoch,
                 const SVLConfig &cfg) {
  return classification_loss + KappaAt(epoch, cfg) * svl;
}

CentroidTable BuildCentroids(const std::vector<Matrix> &embeddings,
                             const std::vector<int> &labels) {
  if (embeddings.size() != labels.size())
    throw std::invalid_argument("BuildCentroids: size mismatch");
  CentroidTable table;
  for (size_t i = 0; i < embeddings.size(); ++i) {
    auto [it, inserted] = table.centroid.try_emplace(
        labels[i], Matrix(1, embeddings[i].Cols()));
    it->second.AddScaled(embeddings[i], 1.0);
    table.count[labels[i]] += 1;
  }
  for (auto &[spk, sum] : table.centroid)
    sum.Scale(1.0 / table.count[spk]);
  return table;
}

ad::Tensor MarginLossGraph(ad::Graph *g, ad::Tensor phi_s, ad::Tensor sigma_s,
                           int label, ad::Tensor W, double s, double m,
                           bool uncertainty_aware, const Matrix &lambda_diag) {
  const Matrix &wv = g->Value(W);
  int C = wv.Rows();
  int d = wv.Cols();
  CheckLabel(label, C);

  ad::Tensor norm2 = ad::SumAll(*g, ad::Mul(*g, phi_s, phi_s));
  ad::Tensor unit = ad::ScalarMul(*g, ad::Rsqrt(*g, norm2), phi_s);
  ad::Tensor w_norm = ad::Mul(
      *g, W,
      ad::BroadcastCols(*g, ad::Rsqrt(*g, ad::RowSum(*g, ad::Mul(*g, W, W))),
                        d));
  ad::Tensor cos = ad::MatMulNT(*g, unit, w_norm);  // 1 x C

  Matrix onehot(1, C);
  onehot(0, label) = 1.0;
  ad::Tensor cos_y = ad::SumAll(*g, ad::MulConst(*g, cos, onehot));
  ad::Tensor sin_y = ad::SinFromCos(*g, cos_y);
  ad::Tensor cos_margin = ad::Sub(*g, ad::Scale(*g, cos_y, std::cos(m)),
                                  ad::Scale(*g, sin_y, std::sin(m)));
  ad::Tensor delta = ad::Sub(*g, cos_margin, cos_y);  // 1 x 1
  ad::Tensor onehot_t = g->Input(onehot);
  ad::Tensor adjusted = ad::Add(*g, cos, ad::ScalarMul(*g, delta, onehot_t));

  ad::Tensor logits;
  if (uncertainty_aware) {
    ad::Tensor metric = ad::AddConst(*g, sigma_s, lambda_diag);
    ad::Tensor quad =
        ad::SumAll(*g, ad::Mul(*g, ad::Mul(*g, phi_s, phi_s), metric));
    ad::Tensor s_u = ad::Mul(*g, ad::Sqrt(*g, norm2), ad::Rsqrt(*g, quad));
    logits = ad::Scale(*g, ad::ScalarMul(*g, s_u, adjusted), s);
  } else {
    logits = ad::Scale(*g, adjusted, s);
  }
  ad::Tensor target = ad::SumAll(*g, ad::MulConst(*g, logits, onehot));
  return ad::Sub(*g, ad::LogSumExpRow(*g, logits), target);
}

ad::Tensor SvlSampleGraph(ad::Graph *g, ad::Tensor phi_s, ad::Tensor sigma_s,
                          ad::Tensor alpha, const Matrix &centroid) {
  Matrix neg_centroid = centroid;
  neg_centroid.Scale(-1.0);
  ad::Tensor dev = ad::Abs(*g, ad::AddConst(*g, phi_s, neg_centroid));
  ad::Tensor pred = ad::ScalarMul(*g, alpha, ad::Sqrt(*g, sigma_s));
  ad::Tensor diff = ad::Sub(*g, pred, dev);
  return ad::SumAll(*g, ad::Mul(*g, diff, diff));
}

}  // namespace uase

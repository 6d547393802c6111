// uase/pooling.cc
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

#include "uase/pooling.h"

#include <cmath>
#include <stdexcept>

namespace uase {

Matrix PrecisionFromLogits(const Matrix &logit, PrecisionMode mode) {
  if (mode == PrecisionMode::kSoftplus) {
    Matrix L(logit.Rows(), logit.Cols());
    for (size_t i = 0; i < L.Size(); ++i) {
      double x = logit[i];
      L[i] = x > 30.0 ? x : std::log1p(std::exp(x));
    }
    return L;
  }
  // Softmax over frames, per dimension.
  Matrix L(logit.Rows(), logit.Cols());
  for (int c = 0; c < logit.Cols(); ++c) {
    double mx = logit(0, c);
    for (int r = 1; r < logit.Rows(); ++r) mx = std::max(mx, logit(r, c));
    double sum = 0.0;
    for (int r = 0; r < logit.Rows(); ++r) {
      L(r, c) = std::exp(logit(r, c) - mx);
      sum += L(r, c);
    }
    for (int r = 0; r < logit.Rows(); ++r) L(r, c) /= sum;
  }
  return L;
}

PosteriorGaussian GaussianPosterior(const FrameGaussians &frames,
                                    const PriorParams &prior) {
  int d = prior.z_p.Cols();
  PosteriorGaussian post;
  if (frames.z.Rows() == 0) {
    post.phi = prior.z_p;
    post.prec = prior.L_p;
    post.cov = Matrix(1, d);
    for (int c = 0; c < d; ++c) post.cov(0, c) = 1.0 / prior.L_p(0, c);
    post.from_empty_input = true;
    return post;
  }
  if (frames.z.Cols() != d || !frames.z.SameShape(frames.L))
    throw std::invalid_argument("GaussianPosterior: shape mismatch");
  post.phi = Matrix(1, d);
  post.prec = Matrix(1, d);
  post.cov = Matrix(1, d);
  for (int c = 0; c < d; ++c) {
    double num = prior.L_p(0, c) * prior.z_p(0, c);
    double prec = prior.L_p(0, c);
    for (int t = 0; t < frames.z.Rows(); ++t) {
      num += frames.L(t, c) * frames.z(t, c);
      prec += frames.L(t, c);
    }
    post.phi(0, c) = num / prec;
    post.prec(0, c) = prec;
    post.cov(0, c) = 1.0 / prec;
  }
  return post;
}

Matrix PropagateMean(const PosteriorGaussian &post,
                     const SharedHeadParams &head) {
  int d = post.phi.Cols();
  for (int c = 0; c < d; ++c)
    if (head.sigma_bn(0, c) + head.eps <= 0.0)
      throw std::invalid_argument("PropagateMean: sigma_bn + eps <= 0");
  Matrix normed(1, d);
  for (int c = 0; c < d; ++c) {
    double inv = 1.0 / std::sqrt(head.sigma_bn(0, c) + head.eps);
    normed(0, c) = (post.phi(0, c) - head.mu_bn(0, c)) * inv *
                       head.gamma_bn(0, c) +
                   head.beta_bn(0, c);
  }
  Matrix out = normed.MatMulNT(head.A_fc);
  out.AddScaled(head.b_fc, 1.0);
  return out;
}

Matrix PropagateVariance(const PosteriorGaussian &post,
                         const SharedHeadParams &head) {
  int d = post.phi.Cols();
  int d_out = head.A_fc.Rows();
  for (int c = 0; c < d; ++c)
    if (head.sigma_bn(0, c) + head.eps <= 0.0)
      throw std::invalid_argument("PropagateVariance: sigma_bn + eps <= 0");
  Matrix D(1, d);
  for (int c = 0; c < d; ++c)
    D(0, c) = post.cov(0, c) * head.gamma_bn(0, c) * head.gamma_bn(0, c) /
              (head.sigma_bn(0, c) + head.eps);
  Matrix out(1, d_out);
  for (int i = 0; i < d_out; ++i) {
    double acc = 0.0;
    for (int c = 0; c < d; ++c)
      acc += head.A_fc(i, c) * head.A_fc(i, c) * D(0, c);
    out(0, i) = acc;
  }
  return out;
}

void CollectParams(SharedHeadParams &head, const std::string &prefix,
                   NamedParams *out) {
  out->emplace_back(prefix + "gamma_bn", &head.gamma_bn);
  out->emplace_back(prefix + "beta_bn", &head.beta_bn);
  out->emplace_back(prefix + "A_fc", &head.A_fc);
  out->emplace_back(prefix + "b_fc", &head.b_fc);
}

SharedHeadParams InitSharedHead(int d, int d_out, RandomStream *rng) {
  SharedHeadParams head;
  head.mu_bn = Matrix(1, d);
  head.sigma_bn = Matrix(1, d, 1.0);
  head.gamma_bn = Matrix(1, d, 1.0);
  head.beta_bn = Matrix(1, d);
  head.A_fc = rng->GaussianMatrix(d_out, d, 1.0 / std::sqrt(double(d)));
  head.b_fc = Matrix(1, d_out);
  return head;
}

HeadTensors UploadHead(ad::Graph *g, const SharedHeadParams &head, bool rg) {
  return HeadTensors{g->Input(head.gamma_bn, rg), g->Input(head.beta_bn, rg),
                     g->Input(head.A_fc, rg), g->Input(head.b_fc, rg)};
}

static PooledTensors HeadGraph(ad::Graph *g, ad::Tensor phi, ad::Tensor cov,
                               const SharedHeadParams &head,
                               const HeadTensors &head_t) {
  int d = head.mu_bn.Cols();
  Matrix inv_std(1, d), inv_var(1, d), neg_mu(1, d);
  for (int c = 0; c < d; ++c) {
    double v = head.sigma_bn(0, c) + head.eps;
    if (v <= 0.0) throw std::invalid_argument("HeadGraph: sigma_bn + eps <= 0");
    inv_std(0, c) = 1.0 / std::sqrt(v);
    inv_var(0, c) = 1.0 / v;
    neg_mu(0, c) = -head.mu_bn(0, c);
  }
  ad::Tensor centered = ad::AddConst(*g, phi, neg_mu);
  ad::Tensor scaled = ad::MulConst(*g, centered, inv_std);
  ad::Tensor affined =
      ad::Add(*g, ad::Mul(*g, scaled, head_t.gamma_bn), head_t.beta_bn);
  ad::Tensor phi_s =
      ad::Add(*g, ad::MatMulNT(*g, affined, head_t.A_fc), head_t.b_fc);

  ad::Tensor gamma_sq = ad::Mul(*g, head_t.gamma_bn, head_t.gamma_bn);
  ad::Tensor D = ad::Mul(*g, cov, ad::MulConst(*g, gamma_sq, inv_var));
  ad::Tensor A_sq = ad::Mul(*g, head_t.A_fc, head_t.A_fc);
  ad::Tensor sigma_s = ad::MatMulNT(*g, D, A_sq);

  PooledTensors out;
  out.phi = phi;
  out.cov = cov;
  out.phi_s = phi_s;
  out.sigma_s = sigma_s;
  return out;
}

PooledTensors PoolGraph(ad::Graph *g, ad::Tensor z, ad::Tensor logit,
                        PrecisionMode mode, const PriorParams &prior,
                        const SharedHeadParams &head,
                        const HeadTensors &head_t) {
  int d = g->Value(z).Cols();
  ad::Tensor L;
  if (mode == PrecisionMode::kSoftplus) {
    L = ad::Softplus(*g, logit);
  } else {
    // Per-dimension softmax across frames.
    L = ad::Transpose(*g, ad::RowSoftmax(*g, ad::Transpose(*g, logit)));
  }
  Matrix prior_num(1, d);
  for (int c = 0; c < d; ++c)
    prior_num(0, c) = prior.L_p(0, c) * prior.z_p(0, c);
  ad::Tensor num = ad::AddConst(*g, ad::ColSum(*g, ad::Mul(*g, L, z)), prior_num);
  ad::Tensor prec = ad::AddConst(*g, ad::ColSum(*g, L), prior.L_p);
  ad::Tensor phi = ad::Div(*g, num, prec);
  ad::Tensor cov = ad::Div(*g, g->Input(Matrix(1, d, 1.0)), prec);
  return HeadGraph(g, phi, cov, head, head_t);
}

PooledTensors MeanPoolGraph(ad::Graph *g, ad::Tensor z,
                            const SharedHeadParams &head,
                            const HeadTensors &head_t) {
  const Matrix &zv = g->Value(z);
  int T = zv.Rows(), d = zv.Cols();
  ad::Tensor phi = ad::Scale(*g, ad::ColSum(*g, z), 1.0 / T);
  ad::Tensor cov = g->Input(Matrix(1, d, 1.0 / T));
  return HeadGraph(g, phi, cov, head, head_t);
}

}  // namespace uase

// uase/pooling.h
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

#ifndef UASE_POOLING_H_
#define UASE_POOLING_H_

#include <string>

#include "uase/autodiff.h"
#include "uase/encoder.h"
#include "uase/matrix.h"

namespace uase {

// Gaussian posterior inference pooling: frame observations with diagonal
// precisions are fused with a conjugate prior into an utterance-level
// posterior, whose mean and diagonal covariance then pass through a shared
// batch-norm + projection head along separate mean/variance branches.

struct PriorParams {
  Matrix z_p;  // 1 x d, prior mean
  Matrix L_p;  // 1 x d, diagonal prior precision (> 0, or 0 for the
               // vanishing-prior mean-pooling reduction)
};

struct FrameGaussians {
  Matrix z;  // T x d
  Matrix L;  // T x d, diagonal frame precisions, > 0
};

struct PosteriorGaussian {
  Matrix phi;   // 1 x d
  Matrix prec;  // 1 x d, sum_t L_t + L_p
  Matrix cov;   // 1 x d, 1 / prec
  bool from_empty_input = false;  // T = 0 fell back to the prior
};

struct SharedHeadParams {
  Matrix mu_bn, sigma_bn;     // 1 x d, batch statistics
  Matrix gamma_bn, beta_bn;   // 1 x d, affine parameters
  double eps = 1e-5;
  Matrix A_fc;  // d_out x d
  Matrix b_fc;  // 1 x d_out
};

struct EmbeddingWithUncertainty {
  std::string id;
  Matrix phi_s;    // 1 x d_out
  Matrix sigma_s;  // 1 x d_out, diag of the propagated covariance
};

enum class PrecisionMode { kSoftplus, kSoftmaxOverTime };

/// softplus mode: L = log(1+exp(logit)) elementwise.  softmax_over_time mode:
/// per dimension, softmax of the logits across frames.
Matrix PrecisionFromLogits(const Matrix &logit, PrecisionMode mode);

/// phi = (sum_t L_t z_t + L_p z_p) / (sum_t L_t + L_p), elementwise diagonal.
/// T = 0 returns the prior, flagged.
PosteriorGaussian GaussianPosterior(const FrameGaussians &frames,
                                    const PriorParams &prior);

/// Mean branch: ((phi - mu)/sqrt(sigma + eps) * gamma + beta) A^T + b.
Matrix PropagateMean(const PosteriorGaussian &post,
                     const SharedHeadParams &head);

/// Variance branch: diag(A D A^T) with D = cov * gamma^2 / (sigma + eps).
/// Shift parameters do not appear.
Matrix PropagateVariance(const PosteriorGaussian &post,
                         const SharedHeadParams &head);

void CollectParams(SharedHeadParams &head, const std::string &prefix,
                   NamedParams *out);  // trainable gamma/beta/A/b only

SharedHeadParams InitSharedHead(int d, int d_out, RandomStream *rng);

// Tape-side pooling.  Batch statistics enter as constants (running averages);
// gamma/beta/A/b are trainable tensors.
struct HeadTensors {
  ad::Tensor gamma_bn, beta_bn, A_fc, b_fc;
};
HeadTensors UploadHead(ad::Graph *g, const SharedHeadParams &head, bool rg);

struct PooledTensors {
  ad::Tensor phi;      // 1 x d
  ad::Tensor cov;      // 1 x d
  ad::Tensor phi_s;    // 1 x d_out
  ad::Tensor sigma_s;  // 1 x d_out
};

PooledTensors PoolGraph(ad::Graph *g, ad::Tensor z, ad::Tensor logit,
                        PrecisionMode mode, const PriorParams &prior,
                        const SharedHeadParams &head,
                        const HeadTensors &head_t);

/// Mean-pooling baseline on the tape: unit frame precisions, zero prior
/// precision; the posterior mean reduces exactly to the frame average.
PooledTensors MeanPoolGraph(ad::Graph *g, ad::Tensor z,
                            const SharedHeadParams &head,
                            const HeadTensors &head_t);

}  // namespace uase

#endif  // UASE_POOLING_H_

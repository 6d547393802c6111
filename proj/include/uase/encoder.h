// uase/encoder.h
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

#ifndef UASE_ENCODER_H_
#define UASE_ENCODER_H_

#include <string>
#include <utility>
#include <vector>

#include "uase/autodiff.h"
#include "uase/matrix.h"
#include "uase/random.h"

namespace uase {

// Frame-level encoder: a small frame-wise MLP trunk followed by banded
// multi-head self-attention blocks, with separate affine heads producing the
// frame representations z and the frame log-precision logits.

struct MVAConfig {
  int heads = 4;
  int d_model = 32;
  int d_ff = 64;
  int layers = 1;
};

enum class Activation { kRelu, kIdentity };

struct AffineLayer {
  Matrix W;  // in x out
  Matrix b;  // 1 x out
  Activation activation = Activation::kIdentity;
};

struct TransformerBlockParams {
  Matrix ln1_gamma, ln1_beta;  // 1 x d_model
  AffineLayer wq, wk, wv, wo;  // d_model x d_model
  Matrix ln2_gamma, ln2_beta;  // 1 x d_model
  AffineLayer ff1;             // d_model x d_ff, relu
  AffineLayer ff2;             // d_ff x d_model
};

struct EncoderParams {
  std::vector<AffineLayer> trunk;  // chains feature_dim -> ... -> d_model
  MVAConfig mva;
  std::vector<TransformerBlockParams> blocks;  // size mva.layers
  AffineLayer mean_head;       // d_model x d
  AffineLayer precision_head;  // d_model x d
};

struct FrameFeatures {
  Matrix values;  // T x F
};

struct FrameOutputs {
  Matrix z;      // T x d
  Matrix logit;  // T x d, log-precision before positivization
};

/// Window of head h among `heads` heads: 2^(h+1) + 1 (always odd).
int WindowSize(int h, int heads);

/// T x T band matrix with 1 where |i-j| <= (w-1)/2, else 0.  w must be odd.
Matrix BandedMask(int T, int w);

/// Additive attention mask: 0 inside the band, a large negative constant
/// outside, so masked logits underflow to exactly zero weight after the
/// max-subtracted softmax.
Matrix BandedAdditiveMask(int T, int w);

/// Named views over every parameter matrix, used by the optimizer and the
/// checkpoint writer.  Order is deterministic.
using NamedParams = std::vector<std::pair<std::string, Matrix *>>;
void CollectParams(EncoderParams &params, const std::string &prefix,
                   NamedParams *out);

EncoderParams InitEncoder(int feature_dim, int trunk_hidden,
                          const MVAConfig &mva, int d, RandomStream *rng);

// Graph-side parameter handles, mirroring EncoderParams.
struct AffineTensors {
  ad::Tensor W, b;
  Activation activation;
};
struct BlockTensors {
  ad::Tensor ln1_gamma, ln1_beta;
  AffineTensors wq, wk, wv, wo;
  ad::Tensor ln2_gamma, ln2_beta;
  AffineTensors ff1, ff2;
};
struct EncoderTensors {
  std::vector<AffineTensors> trunk;
  std::vector<BlockTensors> blocks;
  AffineTensors mean_head, precision_head;
  MVAConfig mva;
};

EncoderTensors UploadEncoder(ad::Graph *g, const EncoderParams &params,
                             bool requires_grad);

/// Banded multi-head self-attention over x (T x d_model).
ad::Tensor MvaAttentionGraph(ad::Graph *g, ad::Tensor x,
                             const AffineTensors &wq, const AffineTensors &wk,
                             const AffineTensors &wv, const AffineTensors &wo,
                             const MVAConfig &cfg);

struct FrameOutputTensors {
  ad::Tensor z, logit;
};

/// Full encoder forward on the tape: trunk -> pre-norm attention blocks ->
/// mean / precision heads.
FrameOutputTensors EncodeFramesGraph(ad::Graph *g, ad::Tensor features,
                                     const EncoderTensors &enc);

/// Forward-only attention, for callers that do not need gradients.
Matrix MvaAttention(const Matrix &x, const TransformerBlockParams &block,
                    const MVAConfig &cfg);

/// Forward-only encoder.  Throws, naming the stage, if activations go
/// non-finite.
FrameOutputs EncodeFrames(const FrameFeatures &features,
                          const EncoderParams &params);

}  // namespace uase

#endif  // UASE_ENCODER_H_

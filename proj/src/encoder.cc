// uase/encoder.cc
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

#include "uase/encoder.h"

#include <cmath>
#include <stdexcept>

namespace uase {

namespace {

// Large enough that exp(logit - kMasked - rowmax) underflows to exactly 0,
// giving the exact locality invariant.
constexpr double kMaskedLogit = -1e30;
constexpr double kLayerNormEps = 1e-5;

}  // namespace

int WindowSize(int h, int heads) {
  if (h < 0 || h >= heads)
    throw std::out_of_range("WindowSize: head index out of range");
  return (1 << (h + 1)) + 1;
}

Matrix BandedMask(int T, int w) {
  if (w < 1 || w % 2 == 0)
    throw std::invalid_argument("BandedMask: window must be odd and >= 1");
  int half = (w - 1) / 2;
  Matrix mask(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j)
      if (std::abs(i - j) <= half) mask(i, j) = 1.0;
  return mask;
}

Matrix BandedAdditiveMask(int T, int w) {
  Matrix band = BandedMask(T, w);
  Matrix add(T, T);
  for (size_t i = 0; i < add.Size(); ++i)
    add[i] = band[i] > 0.0 ? 0.0 : kMaskedLogit;
  return add;
}

static void CollectAffine(AffineLayer &layer, const std::string &prefix,
                          NamedParams *out) {
  out->emplace_back(prefix + ".W", &layer.W);
  out->emplace_back(prefix + ".b", &layer.b);
}

void CollectParams(EncoderParams &params, const std::string &prefix,
                   NamedParams *out) {
  for (size_t i = 0; i < params.trunk.size(); ++i)
    CollectAffine(params.trunk[i], prefix + "trunk" + std::to_string(i), out);
  for (size_t i = 0; i < params.blocks.size(); ++i) {
    TransformerBlockParams &b = params.blocks[i];
    std::string p = prefix + "block" + std::to_string(i);
    out->emplace_back(p + ".ln1_gamma", &b.ln1_gamma);
    out->emplace_back(p + ".ln1_beta", &b.ln1_beta);
    CollectAffine(b.wq, p + ".wq", out);
    CollectAffine(b.wk, p + ".wk", out);
    CollectAffine(b.wv, p + ".wv", out);
    CollectAffine(b.wo, p + ".wo", out);
    out->emplace_back(p + ".ln2_gamma", &b.ln2_gamma);
    out->emplace_back(p + ".ln2_beta", &b.ln2_beta);
    CollectAffine(b.ff1, p + ".ff1", out);
    CollectAffine(b.ff2, p + ".ff2", out);
  }
  CollectAffine(params.mean_head, prefix + "mean_head", out);
  CollectAffine(params.precision_head, prefix + "precision_head", out);
}

static AffineLayer InitAffine(int in, int out, Activation act,
                              RandomStream *rng) {
  AffineLayer layer;
  layer.W = rng->GaussianMatrix(in, out, 1.0 / std::sqrt(static_cast<double>(in)));
  layer.b = Matrix(1, out);
  layer.activation = act;
  return layer;
}

EncoderParams InitEncoder(int feature_dim, int trunk_hidden,
                          const MVAConfig &mva, int d, RandomStream *rng) {
  if (mva.heads < 1 || mva.d_model % mva.heads != 0)
    throw std::invalid_argument("InitEncoder: d_model must divide by heads");
  EncoderParams p;
  p.mva = mva;
  p.trunk.push_back(InitAffine(feature_dim, trunk_hidden, Activation::kRelu, rng));
  p.trunk.push_back(InitAffine(trunk_hidden, mva.d_model, Activation::kRelu, rng));
  for (int l = 0; l < mva.layers; ++l) {
    TransformerBlockParams b;
    b.ln1_gamma = Matrix(1, mva.d_model, 1.0);
    b.ln1_beta = Matrix(1, mva.d_model);
    b.wq = InitAffine(mva.d_model, mva.d_model, Activation::kIdentity, rng);
    b.wk = InitAffine(mva.d_model, mva.d_model, Activation::kIdentity, rng);
    b.wv = InitAffine(mva.d_model, mva.d_model, Activation::kIdentity, rng);
    b.wo = InitAffine(mva.d_model, mva.d_model, Activation::kIdentity, rng);
    b.ln2_gamma = Matrix(1, mva.d_model, 1.0);
    b.ln2_beta = Matrix(1, mva.d_model);
    b.ff1 = InitAffine(mva.d_model, mva.d_ff, Activation::kRelu, rng);
    b.ff2 = InitAffine(mva.d_ff, mva.d_model, Activation::kIdentity, rng);
    p.blocks.push_back(std::move(b));
  }
  p.mean_head = InitAffine(mva.d_model, d, Activation::kIdentity, rng);
  p.precision_head = InitAffine(mva.d_model, d, Activation::kIdentity, rng);
  return p;
}

static AffineTensors UploadAffine(ad::Graph *g, const AffineLayer &layer,
                                  bool rg) {
  return AffineTensors{g->Input(layer.W, rg), g->Input(layer.b, rg),
                       layer.activation};
}

EncoderTensors UploadEncoder(ad::Graph *g, const EncoderParams &params,
                             bool rg) {
  EncoderTensors t;
  t.mva = params.mva;
  for (const AffineLayer &l : params.trunk)
    t.trunk.push_back(UploadAffine(g, l, rg));
  for (const TransformerBlockParams &b : params.blocks) {
    BlockTensors bt;
    bt.ln1_gamma = g->Input(b.ln1_gamma, rg);
    bt.ln1_beta = g->Input(b.ln1_beta, rg);
    bt.wq = UploadAffine(g, b.wq, rg);
    bt.wk = UploadAffine(g, b.wk, rg);
    bt.wv = UploadAffine(g, b.wv, rg);
    bt.wo = UploadAffine(g, b.wo, rg);
    bt.ln2_gamma = g->Input(b.ln2_gamma, rg);
    bt.ln2_beta = g->Input(b.ln2_beta, rg);
    bt.ff1 = UploadAffine(g, b.ff1, rg);
    bt.ff2 = UploadAffine(g, b.ff2, rg);
    t.blocks.push_back(bt);
  }
  t.mean_head = UploadAffine(g, params.mean_head, rg);
  t.precision_head = UploadAffine(g, params.precision_head, rg);
  return t;
}

static ad::Tensor ApplyAffine(ad::Graph *g, ad::Tensor x,
                              const AffineTensors &layer) {
  ad::Tensor y = ad::AddRowVec(*g, ad::MatMul(*g, x, layer.W), layer.b);
  if (layer.activation == Activation::kRelu) y = ad::Relu(*g, y);
  return y;
}

static ad::Tensor LayerNorm(ad::Graph *g, ad::Tensor x, ad::Tensor gamma,
                            ad::Tensor beta) {
  int T = g->Value(x).Rows();
  int D = g->Value(x).Cols();
  ad::Tensor mu = ad::Scale(*g, ad::RowSum(*g, x), 1.0 / D);
  ad::Tensor xc = ad::Sub(*g, x, ad::BroadcastCols(*g, mu, D));
  ad::Tensor var = ad::Scale(*g, ad::RowSum(*g, ad::Mul(*g, xc, xc)), 1.0 / D);
  ad::Tensor inv = ad::Rsqrt(*g, var, kLayerNormEps);
  ad::Tensor xn = ad::Mul(*g, xc, ad::BroadcastCols(*g, inv, D));
  ad::Tensor scaled = ad::Mul(*g, xn, ad::BroadcastRows(*g, gamma, T));
  return ad::Add(*g, scaled, ad::BroadcastRows(*g, beta, T));
}

ad::Tensor MvaAttentionGraph(ad::Graph *g, ad::Tensor x,
                             const AffineTensors &wq, const AffineTensors &wk,
                             const AffineTensors &wv, const AffineTensors &wo,
                             const MVAConfig &cfg) {
  int T = g->Value(x).Rows();
  int dk = cfg.d_model / cfg.heads;
  ad::Tensor q = ApplyAffine(g, x, wq);
  ad::Tensor k = ApplyAffine(g, x, wk);
  ad::Tensor v = ApplyAffine(g, x, wv);
  std::vector<ad::Tensor> heads;
  for (int h = 0; h < cfg.heads; ++h) {
    ad::Tensor qh = ad::SliceCols(*g, q, h * dk, dk);
    ad::Tensor kh = ad::SliceCols(*g, k, h * dk, dk);
    ad::Tensor vh = ad::SliceCols(*g, v, h * dk, dk);
    ad::Tensor scores =
        ad::Scale(*g, ad::MatMulNT(*g, qh, kh), 1.0 / std::sqrt(double(dk)));
    ad::Tensor masked =
        ad::AddConst(*g, scores, BandedAdditiveMask(T, WindowSize(h, cfg.heads)));
    ad::Tensor weights = ad::RowSoftmax(*g, masked);
    heads.push_back(ad::MatMul(*g, weights, vh));
  }
  ad::Tensor concat = ad::ConcatCols(*g, heads);
  return ApplyAffine(g, concat, wo);
}

FrameOutputTensors EncodeFramesGraph(ad::Graph *g, ad::Tensor features,
                                     const EncoderTensors &enc) {
  ad::Tensor x = features;
  for (const AffineTensors &layer : enc.trunk) x = ApplyAffine(g, x, layer);
  for (const BlockTensors &b : enc.blocks) {
    ad::Tensor h1 = LayerNorm(g, x, b.ln1_gamma, b.ln1_beta);
    ad::Tensor attn = MvaAttentionGraph(g, h1, b.wq, b.wk, b.wv, b.wo, enc.mva);
    ad::Tensor x2 = ad::Add(*g, x, attn);
    ad::Tensor h2 = LayerNorm(g, x2, b.ln2_gamma, b.ln2_beta);
    ad::Tensor ff = ApplyAffine(g, ApplyAffine(g, h2, b.ff1), b.ff2);
    x = ad::Add(*g, x2, ff);
  }
  FrameOutputTensors out;
  out.z = ApplyAffine(g, x, enc.mean_head);
  out.logit = ApplyAffine(g, x, enc.precision_head);
  return out;
}

Matrix MvaAttention(const Matrix &x, const TransformerBlockParams &block,
                    const MVAConfig &cfg) {
  if (x.Cols() != cfg.d_model)
    throw std::invalid_argument("MvaAttention: input width != d_model");
  ad::Graph g;
  ad::Tensor xt = g.Input(x);
  EncoderParams tmp;
  tmp.mva = cfg;
  AffineTensors wq = UploadAffine(&g, block.wq, false);
  AffineTensors wk = UploadAffine(&g, block.wk, false);
  AffineTensors wv = UploadAffine(&g, block.wv, false);
  AffineTensors wo = UploadAffine(&g, block.wo, false);
  ad::Tensor out = MvaAttentionGraph(&g, xt, wq, wk, wv, wo, cfg);
  return g.Value(out);
}

FrameOutputs EncodeFrames(const FrameFeatures &features,
                          const EncoderParams &params) {
  if (features.values.Rows() < 1)
    throw std::invalid_argument("EncodeFrames: need at least one frame");
  if (!params.trunk.empty() &&
      features.values.Cols() != params.trunk[0].W.Rows())
    throw std::invalid_argument("EncodeFrames: feature dim mismatch");
  ad::Graph g;
  ad::Tensor x = g.Input(features.values);
  EncoderTensors enc = UploadEncoder(&g, params, false);
  FrameOutputTensors out = EncodeFramesGraph(&g, x, enc);
  FrameOutputs result{g.Value(out.z), g.Value(out.logit)};
  if (!result.z.AllFinite())
    throw std::runtime_error("EncodeFrames: non-finite activation in mean head");
  if (!result.logit.AllFinite())
    throw std::runtime_error(
        "EncodeFrames: non-finite activation in precision head");
  return result;
}

}  // namespace uase

// tests/test_encoder.cc
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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "uase/encoder.h"
#include "uase/gradcheck.h"
#include "uase/stats.h"

using namespace uase;

namespace {

TransformerBlockParams RandomBlock(const MVAConfig &cfg, RandomStream *rng) {
  auto affine = [&](int in, int out, Activation act) {
    AffineLayer l;
    l.W = rng->GaussianMatrix(in, out, 0.5);
    l.b = rng->GaussianMatrix(1, out, 0.1);
    l.activation = act;
    return l;
  };
  TransformerBlockParams b;
  b.ln1_gamma = rng->UniformMatrix(1, cfg.d_model, 0.5, 1.5);
  b.ln1_beta = rng->GaussianMatrix(1, cfg.d_model, 0.1);
  b.wq = affine(cfg.d_model, cfg.d_model, Activation::kIdentity);
  b.wk = affine(cfg.d_model, cfg.d_model, Activation::kIdentity);
  b.wv = affine(cfg.d_model, cfg.d_model, Activation::kIdentity);
  b.wo = affine(cfg.d_model, cfg.d_model, Activation::kIdentity);
  b.ln2_gamma = rng->UniformMatrix(1, cfg.d_model, 0.5, 1.5);
  b.ln2_beta = rng->GaussianMatrix(1, cfg.d_model, 0.1);
  b.ff1 = affine(cfg.d_model, cfg.d_ff, Activation::kRelu);
  b.ff2 = affine(cfg.d_ff, cfg.d_model, Activation::kIdentity);
  return b;
}

// Loop-level reference attention: per-head banded softmax over explicit
// score matrices.
Matrix NaiveAttention(const Matrix &x, const TransformerBlockParams &block,
                      const MVAConfig &cfg) {
  int T = x.Rows(), dk = cfg.d_model / cfg.heads;
  Matrix q = x.MatMul(block.wq.W);
  Matrix k = x.MatMul(block.wk.W);
  Matrix v = x.MatMul(block.wv.W);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < cfg.d_model; ++c) {
      q(t, c) += block.wq.b(0, c);
      k(t, c) += block.wk.b(0, c);
      v(t, c) += block.wv.b(0, c);
    }
  Matrix concat(T, cfg.d_model);
  for (int h = 0; h < cfg.heads; ++h) {
    int r = (WindowSize(h, cfg.heads) - 1) / 2;
    for (int i = 0; i < T; ++i) {
      std::vector<double> logits;
      std::vector<int> allowed;
      for (int j = 0; j < T; ++j) {
        if (std::abs(i - j) > r) continue;
        double dot = 0.0;
        for (int c = 0; c < dk; ++c)
          dot += q(i, h * dk + c) * k(j, h * dk + c);
        logits.push_back(dot / std::sqrt(static_cast<double>(dk)));
        allowed.push_back(j);
      }
      std::vector<double> w = Softmax(logits);
      for (int c = 0; c < dk; ++c) {
        double acc = 0.0;
        for (size_t a = 0; a < allowed.size(); ++a)
          acc += w[a] * v(allowed[a], h * dk + c);
        concat(i, h * dk + c) = acc;
      }
    }
  }
  Matrix out = concat.MatMul(block.wo.W);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < cfg.d_model; ++c) out(t, c) += block.wo.b(0, c);
  return out;
}

}  // namespace

TEST_CASE("window sizes follow the power-of-two rule") {
  std::vector<int> expected = {3, 5, 9, 17, 33, 65, 129, 257};
  for (int h = 0; h < 8; ++h) CHECK(WindowSize(h, 8) == expected[h]);
  CHECK(WindowSize(0, 4) == 3);
  CHECK(WindowSize(3, 4) == 17);
  CHECK_THROWS(WindowSize(-1, 8));
  CHECK_THROWS(WindowSize(8, 8));
}

TEST_CASE("banded mask shapes") {
  Matrix m = BandedMask(4, 3);
  Matrix expected(4, 4, {1, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1, 0, 0, 1, 1});
  CHECK(m == expected);

  // Window covering the whole sequence degenerates to full attention.
  Matrix full = BandedMask(3, 5);
  for (size_t i = 0; i < full.Size(); ++i) CHECK(full[i] == 1.0);

  CHECK_THROWS(BandedMask(4, 2));

  Matrix add = BandedAdditiveMask(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (expected(i, j) == 1.0) CHECK(add(i, j) == 0.0);
      else CHECK(add(i, j) < -1e29);
    }
}

TEST_CASE("attention matches the loop-level reference") {
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 4;
  cfg.d_ff = 8;
  RandomStream rng(17);
  for (int probe = 0; probe < 10; ++probe) {
    TransformerBlockParams block = RandomBlock(cfg, &rng);
    int T = 1 + static_cast<int>(rng.Below(7));
    Matrix x = rng.GaussianMatrix(T, cfg.d_model);
    Matrix got = MvaAttention(x, block, cfg);
    Matrix want = NaiveAttention(x, block, cfg);
    REQUIRE(got.SameShape(want));
    for (size_t i = 0; i < got.Size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("attention is exactly local per head") {
  MVAConfig cfg;
  cfg.heads = 4;
  cfg.d_model = 8;
  RandomStream rng(29);
  TransformerBlockParams block = RandomBlock(cfg, &rng);
  // Identity output projection exposes each head's slice directly.
  block.wo.W = Matrix::Identity(cfg.d_model);
  block.wo.b = Matrix(1, cfg.d_model);

  int T = 24, dk = cfg.d_model / cfg.heads;
  Matrix x = rng.GaussianMatrix(T, cfg.d_model);
  Matrix base = MvaAttention(x, block, cfg);

  for (int h = 0; h < cfg.heads; ++h) {
    int r = (WindowSize(h, cfg.heads) - 1) / 2;
    for (int j : {0, T / 2, T - 1}) {
      Matrix perturbed = x;
      for (int c = 0; c < cfg.d_model; ++c) perturbed(j, c) += 10.0;
      Matrix out = MvaAttention(perturbed, block, cfg);
      for (int i = 0; i < T; ++i) {
        if (std::abs(i - j) <= r) continue;
        // Out-of-window rows of head h must be bitwise untouched.
        for (int c = 0; c < dk; ++c)
          CHECK(out(i, h * dk + c) == base(i, h * dk + c));
      }
    }
  }
}

TEST_CASE("single-frame attention reduces to the value projection") {
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 4;
  RandomStream rng(31);
  TransformerBlockParams block = RandomBlock(cfg, &rng);
  block.wo.W = Matrix::Identity(cfg.d_model);
  block.wo.b = Matrix(1, cfg.d_model);
  Matrix x = rng.GaussianMatrix(1, cfg.d_model);
  Matrix out = MvaAttention(x, block, cfg);
  Matrix v = x.MatMul(block.wv.W);
  for (int c = 0; c < cfg.d_model; ++c)
    CHECK(out(0, c) == doctest::Approx(v(0, c) + block.wv.b(0, c)).epsilon(1e-12));
}

TEST_CASE("encoder forward is deterministic and finite") {
  RandomStream rng(41);
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 8;
  cfg.d_ff = 12;
  EncoderParams enc = InitEncoder(6, 10, cfg, 5, &rng);
  Matrix features = RandomStream(7).GaussianMatrix(9, 6);
  FrameOutputs a = EncodeFrames(FrameFeatures{features}, enc);
  FrameOutputs b = EncodeFrames(FrameFeatures{features}, enc);
  CHECK(a.z == b.z);
  CHECK(a.logit == b.logit);
  CHECK(a.z.Rows() == 9);
  CHECK(a.z.Cols() == 5);
  CHECK(a.logit.SameShape(a.z));
  CHECK(a.z.AllFinite());
}

TEST_CASE("encoder flags non-finite activations with the stage name") {
  RandomStream rng(43);
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 8;
  EncoderParams enc = InitEncoder(4, 6, cfg, 3, &rng);
  enc.mean_head.W(0, 0) = std::nan("");
  CHECK_THROWS_WITH_AS(
      EncodeFrames(FrameFeatures{rng.GaussianMatrix(5, 4)}, enc),
      doctest::Contains("mean"), std::runtime_error);
}

TEST_CASE("collected parameter names are unique and complete") {
  RandomStream rng(47);
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 8;
  cfg.layers = 2;
  EncoderParams enc = InitEncoder(4, 6, cfg, 3, &rng);
  NamedParams params;
  CollectParams(enc, "encoder.", &params);
  // 2 trunk + 2 blocks x (2 LN + 4 attention + 2 FF affines) + 2 heads.
  CHECK(params.size() == 2 * 2 + 2 * (4 + 2 * 4 + 2 * 2) + 2 * 2);
  for (size_t i = 0; i < params.size(); ++i)
    for (size_t j = i + 1; j < params.size(); ++j)
      CHECK(params[i].first != params[j].first);
}

TEST_CASE("encoder gradients match finite differences") {
  RandomStream rng(53);
  MVAConfig cfg;
  cfg.heads = 2;
  cfg.d_model = 4;
  cfg.d_ff = 6;
  EncoderParams enc = InitEncoder(3, 5, cfg, 3, &rng);
  Matrix features = rng.GaussianMatrix(4, 3);
  // Weighted sums pin every output entry with a distinct coefficient.
  Matrix wz = rng.GaussianMatrix(4, 3), wl = rng.GaussianMatrix(4, 3);

  NamedParams params;
  CollectParams(enc, "", &params);
  std::vector<double> flat;
  for (auto &[name, mat] : params)
    for (size_t i = 0; i < mat->Size(); ++i) flat.push_back((*mat)[i]);

  auto eval = [&](const std::vector<double> &x, bool rg,
                  std::vector<double> *grad_out) {
    EncoderParams local = enc;
    NamedParams lp;
    CollectParams(local, "", &lp);
    size_t off = 0;
    for (auto &[name, mat] : lp)
      for (size_t i = 0; i < mat->Size(); ++i) (*mat)[i] = x[off++];
    ad::Graph g;
    EncoderTensors t = UploadEncoder(&g, local, rg);
    FrameOutputTensors out = EncodeFramesGraph(&g, g.Input(features), t);
    ad::Tensor root = ad::Add(g, ad::SumAll(g, ad::MulConst(g, out.z, wz)),
                              ad::SumAll(g, ad::MulConst(g, out.logit, wl)));
    double value = g.Value(root)(0, 0);
    if (grad_out) {
      g.Backward(root);
      size_t first = 0;  // inputs are the first nodes on the tape
      for (size_t p = 0; p < lp.size(); ++p) {
        const Matrix &grad = g.Grad(ad::Tensor{static_cast<int>(first + p)});
        for (size_t i = 0; i < grad.Size(); ++i) grad_out->push_back(grad[i]);
      }
    }
    return value;
  };

  std::vector<double> analytic;
  eval(flat, true, &analytic);
  auto f = [&](const std::vector<double> &x) { return eval(x, false, nullptr); };
  GradCheckReport report = CompareGradient(f, flat, analytic);
  CHECK(report.max_rel_diff < 1e-4);
}

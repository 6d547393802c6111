// tests/test_pooling.cc
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

#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "uase/gradcheck.h"
#include "uase/pooling.h"
#include "uase/random.h"

using namespace uase;

namespace {

FrameGaussians RandomFrames(int T, int d, RandomStream *rng) {
  FrameGaussians frames;
  frames.z = rng->GaussianMatrix(T, d, 2.0);
  frames.L = rng->UniformMatrix(T, d, 0.1, 3.0);
  return frames;
}

PriorParams RandomPrior(int d, RandomStream *rng) {
  PriorParams prior;
  prior.z_p = rng->GaussianMatrix(1, d);
  prior.L_p = rng->UniformMatrix(1, d, 0.2, 2.0);
  return prior;
}

// Sequential Bayesian update: fold frames in one at a time, each as a
// conjugate Gaussian observation.
PosteriorGaussian SequentialOracle(const FrameGaussians &frames,
                                   const PriorParams &prior) {
  int d = prior.z_p.Cols();
  Matrix mean = prior.z_p, prec = prior.L_p;
  for (int t = 0; t < frames.z.Rows(); ++t)
    for (int c = 0; c < d; ++c) {
      double p_new = prec(0, c) + frames.L(t, c);
      mean(0, c) = (prec(0, c) * mean(0, c) +
                    frames.L(t, c) * frames.z(t, c)) / p_new;
      prec(0, c) = p_new;
    }
  PosteriorGaussian post;
  post.phi = mean;
  post.prec = prec;
  post.cov = Matrix(1, d);
  for (int c = 0; c < d; ++c) post.cov(0, c) = 1.0 / prec(0, c);
  return post;
}

SharedHeadParams RandomHead(int d, int d_out, RandomStream *rng) {
  SharedHeadParams head;
  head.mu_bn = rng->GaussianMatrix(1, d);
  head.sigma_bn = rng->UniformMatrix(1, d, 0.2, 2.0);
  head.gamma_bn = rng->UniformMatrix(1, d, 0.5, 1.5);
  head.beta_bn = rng->GaussianMatrix(1, d, 0.3);
  head.A_fc = rng->GaussianMatrix(d_out, d);
  head.b_fc = rng->GaussianMatrix(1, d_out, 0.2);
  return head;
}

}  // namespace

TEST_CASE("posterior matches the frozen two-frame example") {
  FrameGaussians frames;
  frames.z = Matrix(2, 1, {1.0, 3.0});
  frames.L = Matrix(2, 1, {1.0, 2.0});
  PriorParams prior;
  prior.z_p = Matrix(1, 1, {0.0});
  prior.L_p = Matrix(1, 1, {1.0});
  PosteriorGaussian post = GaussianPosterior(frames, prior);
  CHECK(post.phi(0, 0) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(post.prec(0, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(post.cov(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_FALSE(post.from_empty_input);
}

TEST_CASE("posterior equals the sequential product-of-Gaussians oracle") {
  RandomStream rng(101);
  for (int probe = 0; probe < 200; ++probe) {
    int T = 1 + static_cast<int>(rng.Below(16));
    int d = 1 + static_cast<int>(rng.Below(8));
    FrameGaussians frames = RandomFrames(T, d, &rng);
    PriorParams prior = RandomPrior(d, &rng);
    PosteriorGaussian got = GaussianPosterior(frames, prior);
    PosteriorGaussian want = SequentialOracle(frames, prior);
    for (int c = 0; c < d; ++c) {
      CHECK(std::abs(got.phi(0, c) - want.phi(0, c)) <=
            1e-12 * std::max(1.0, std::abs(want.phi(0, c))));
      CHECK(std::abs(got.prec(0, c) - want.prec(0, c)) <=
            1e-12 * want.prec(0, c));
    }
  }
}

TEST_CASE("posterior is invariant to frame order") {
  RandomStream rng(103);
  FrameGaussians frames = RandomFrames(6, 3, &rng);
  PriorParams prior = RandomPrior(3, &rng);
  PosteriorGaussian a = GaussianPosterior(frames, prior);

  FrameGaussians reversed;
  reversed.z = Matrix(6, 3);
  reversed.L = Matrix(6, 3);
  for (int t = 0; t < 6; ++t)
    for (int c = 0; c < 3; ++c) {
      reversed.z(t, c) = frames.z(5 - t, c);
      reversed.L(t, c) = frames.L(5 - t, c);
    }
  PosteriorGaussian b = GaussianPosterior(reversed, prior);
  for (int c = 0; c < 3; ++c) {
    CHECK(a.phi(0, c) == doctest::Approx(b.phi(0, c)).epsilon(1e-14));
    CHECK(a.prec(0, c) == doctest::Approx(b.prec(0, c)).epsilon(1e-14));
  }
}

TEST_CASE("adding frames never lowers the posterior precision") {
  RandomStream rng(107);
  PriorParams prior = RandomPrior(4, &rng);
  FrameGaussians frames = RandomFrames(10, 4, &rng);
  Matrix prev = prior.L_p;
  for (int T = 1; T <= 10; ++T) {
    FrameGaussians head;
    head.z = Matrix(T, 4);
    head.L = Matrix(T, 4);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < 4; ++c) {
        head.z(t, c) = frames.z(t, c);
        head.L(t, c) = frames.L(t, c);
      }
    PosteriorGaussian post = GaussianPosterior(head, prior);
    for (int c = 0; c < 4; ++c) {
      CHECK(post.prec(0, c) > prev(0, c));
    }
    prev = post.prec;
  }
}

TEST_CASE("empty utterance falls back to the prior") {
  PriorParams prior;
  prior.z_p = Matrix(1, 2, {0.5, -1.0});
  prior.L_p = Matrix(1, 2, {2.0, 4.0});
  FrameGaussians frames;
  frames.z = Matrix(0, 2);
  frames.L = Matrix(0, 2);
  PosteriorGaussian post = GaussianPosterior(frames, prior);
  CHECK(post.from_empty_input);
  CHECK(post.phi == prior.z_p);
  CHECK(post.prec == prior.L_p);
}

TEST_CASE("precision from logits") {
  Matrix logit(2, 2, {0.0, 1.0, -40.0, 40.0});
  Matrix sp = PrecisionFromLogits(logit, PrecisionMode::kSoftplus);
  CHECK(sp(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(sp(0, 1) == doctest::Approx(std::log1p(std::exp(1.0))).epsilon(1e-14));
  CHECK(sp(1, 0) > 0.0);        // softplus stays strictly positive
  CHECK(sp(1, 1) == doctest::Approx(40.0).epsilon(1e-12));

  Matrix sm = PrecisionFromLogits(logit, PrecisionMode::kSoftmaxOverTime);
  // Per-dimension softmax over the two frames.
  CHECK(sm(0, 0) + sm(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sm(0, 1) + sm(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sm(0, 0) > sm(1, 0));
  CHECK(sm(1, 1) > sm(0, 1));
}

TEST_CASE("variance branch matches the frozen projection example") {
  PosteriorGaussian post;
  post.phi = Matrix(1, 2);
  post.prec = Matrix(1, 2, {1.0, 0.5});
  post.cov = Matrix(1, 2, {1.0, 2.0});
  SharedHeadParams head;
  head.mu_bn = Matrix(1, 2);
  head.sigma_bn = Matrix(1, 2, {1.0 - head.eps, 1.0 - head.eps});
  head.gamma_bn = Matrix(1, 2, 1.0);
  head.beta_bn = Matrix(1, 2);
  head.A_fc = Matrix(2, 2, {1.0, 1.0, 1.0, -1.0});
  head.b_fc = Matrix(1, 2);
  Matrix sigma = PropagateVariance(post, head);
  CHECK(sigma(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sigma(0, 1) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("variance branch ignores shifts of the posterior mean") {
  RandomStream rng(109);
  SharedHeadParams head = RandomHead(4, 3, &rng);
  PosteriorGaussian post;
  post.phi = rng.GaussianMatrix(1, 4);
  post.prec = rng.UniformMatrix(1, 4, 0.5, 2.0);
  post.cov = Matrix(1, 4);
  for (int c = 0; c < 4; ++c) post.cov(0, c) = 1.0 / post.prec(0, c);

  Matrix sigma = PropagateVariance(post, head);
  PosteriorGaussian shifted = post;
  for (int c = 0; c < 4; ++c) shifted.phi(0, c) += 17.5;
  Matrix sigma2 = PropagateVariance(shifted, head);
  CHECK(sigma == sigma2);

  // beta and b_fc do not appear either.
  SharedHeadParams head2 = head;
  head2.beta_bn = rng.GaussianMatrix(1, 4);
  head2.b_fc = rng.GaussianMatrix(1, 3);
  CHECK(PropagateVariance(post, head2) == sigma);
}

TEST_CASE("mean branch oracle on a hand-checkable head") {
  PosteriorGaussian post;
  post.phi = Matrix(1, 2, {2.0, -1.0});
  post.cov = Matrix(1, 2, {1.0, 1.0});
  SharedHeadParams head;
  head.mu_bn = Matrix(1, 2, {1.0, 1.0});
  head.sigma_bn = Matrix(1, 2, {4.0 - head.eps, 4.0 - head.eps});
  head.gamma_bn = Matrix(1, 2, {2.0, 2.0});
  head.beta_bn = Matrix(1, 2, {0.5, 0.5});
  head.A_fc = Matrix(1, 2, {1.0, 1.0});
  head.b_fc = Matrix(1, 1, {0.25});
  // normalized = (0.5, -1); affine = (1.5, -1.5); projected = 0 + 0.25.
  Matrix phi_s = PropagateMean(post, head);
  CHECK(phi_s(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("graph pooling agrees with the plain path") {
  RandomStream rng(113);
  for (PrecisionMode mode :
       {PrecisionMode::kSoftplus, PrecisionMode::kSoftmaxOverTime}) {
    int T = 5, d = 3, d_out = 4;
    Matrix z = rng.GaussianMatrix(T, d);
    Matrix logit = rng.GaussianMatrix(T, d);
    PriorParams prior = RandomPrior(d, &rng);
    SharedHeadParams head = RandomHead(d, d_out, &rng);

    ad::Graph g;
    HeadTensors ht = UploadHead(&g, head, false);
    PooledTensors pooled =
        PoolGraph(&g, g.Input(z), g.Input(logit), mode, prior, head, ht);

    FrameGaussians frames;
    frames.z = z;
    frames.L = PrecisionFromLogits(logit, mode);
    PosteriorGaussian post = GaussianPosterior(frames, prior);
    Matrix phi_s = PropagateMean(post, head);
    Matrix sigma_s = PropagateVariance(post, head);

    for (int c = 0; c < d; ++c) {
      CHECK(g.Value(pooled.phi)(0, c) ==
            doctest::Approx(post.phi(0, c)).epsilon(1e-13));
      CHECK(g.Value(pooled.cov)(0, c) ==
            doctest::Approx(post.cov(0, c)).epsilon(1e-13));
    }
    for (int c = 0; c < d_out; ++c) {
      CHECK(g.Value(pooled.phi_s)(0, c) ==
            doctest::Approx(phi_s(0, c)).epsilon(1e-13));
      CHECK(g.Value(pooled.sigma_s)(0, c) ==
            doctest::Approx(sigma_s(0, c)).epsilon(1e-13));
    }
  }
}

TEST_CASE("mean-pool graph reduces to the arithmetic frame mean") {
  RandomStream rng(127);
  int T = 7, d = 3;
  Matrix z = rng.GaussianMatrix(T, d);
  SharedHeadParams head = RandomHead(d, 2, &rng);
  ad::Graph g;
  HeadTensors ht = UploadHead(&g, head, false);
  PooledTensors pooled = MeanPoolGraph(&g, g.Input(z), head, ht);
  for (int c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int t = 0; t < T; ++t) mean += z(t, c) / T;
    CHECK(g.Value(pooled.phi)(0, c) == doctest::Approx(mean).epsilon(1e-14));
  }

  // Equal precisions with a vanishing prior do the same through the full
  // posterior path.
  FrameGaussians frames;
  frames.z = z;
  frames.L = Matrix(T, d, 1.0);
  PriorParams prior;
  prior.z_p = Matrix(1, d);
  prior.L_p = Matrix(1, d, 0.0);
  PosteriorGaussian post = GaussianPosterior(frames, prior);
  for (int c = 0; c < d; ++c)
    CHECK(post.phi(0, c) == doctest::Approx(g.Value(pooled.phi)(0, c))
                                .epsilon(1e-14));
}

TEST_CASE("pooling gradients match finite differences") {
  RandomStream rng(131);
  int T = 4, d = 3, d_out = 2;
  Matrix z0 = rng.GaussianMatrix(T, d);
  Matrix logit0 = rng.GaussianMatrix(T, d);
  PriorParams prior = RandomPrior(d, &rng);
  SharedHeadParams head = RandomHead(d, d_out, &rng);
  Matrix wphi = rng.GaussianMatrix(1, d_out);
  Matrix wsig = rng.GaussianMatrix(1, d_out);

  for (PrecisionMode mode :
       {PrecisionMode::kSoftplus, PrecisionMode::kSoftmaxOverTime}) {
    // Flatten z, logit and the trainable head parameters.
    auto eval = [&](const std::vector<double> &x, bool rg,
                    std::vector<double> *grad_out) {
      Matrix z = z0, logit = logit0;
      SharedHeadParams local = head;
      size_t off = 0;
      for (size_t i = 0; i < z.Size(); ++i) z[i] = x[off++];
      for (size_t i = 0; i < logit.Size(); ++i) logit[i] = x[off++];
      NamedParams hp;
      CollectParams(local, "", &hp);
      for (auto &[name, mat] : hp)
        for (size_t i = 0; i < mat->Size(); ++i) (*mat)[i] = x[off++];

      ad::Graph g;
      ad::Tensor tz = g.Input(z, rg);
      ad::Tensor tl = g.Input(logit, rg);
      HeadTensors ht = UploadHead(&g, local, rg);
      PooledTensors pooled = PoolGraph(&g, tz, tl, mode, prior, local, ht);
      ad::Tensor root =
          ad::Add(g, ad::SumAll(g, ad::MulConst(g, pooled.phi_s, wphi)),
                  ad::SumAll(g, ad::MulConst(g, pooled.sigma_s, wsig)));
      double value = g.Value(root)(0, 0);
      if (grad_out) {
        g.Backward(root);
        for (ad::Tensor t : {tz, tl, ht.gamma_bn, ht.beta_bn, ht.A_fc, ht.b_fc}) {
          const Matrix &grad = g.Grad(t);
          for (size_t i = 0; i < grad.Size(); ++i) grad_out->push_back(grad[i]);
        }
      }
      return value;
    };

    std::vector<double> flat;
    for (size_t i = 0; i < z0.Size(); ++i) flat.push_back(z0[i]);
    for (size_t i = 0; i < logit0.Size(); ++i) flat.push_back(logit0[i]);
    SharedHeadParams tmp = head;
    NamedParams hp;
    CollectParams(tmp, "", &hp);
    for (auto &[name, mat] : hp)
      for (size_t i = 0; i < mat->Size(); ++i) flat.push_back((*mat)[i]);

    std::vector<double> analytic;
    eval(flat, true, &analytic);
    auto f = [&](const std::vector<double> &x) { return eval(x, false, nullptr); };
    GradCheckReport report = CompareGradient(f, flat, analytic);
    CHECK(report.max_rel_diff < 1e-4);
  }
}

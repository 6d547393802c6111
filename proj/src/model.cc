// uase/model.cc
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

#include "uase/model.h"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uase/random.h"

namespace uase {

NamedParams Model::Params() {
  NamedParams out;
  CollectParams(encoder, "encoder.", &out);
  CollectParams(head, "head.", &out);
  out.emplace_back("classifier.W", &classifier.W);
  out.emplace_back("alpha", &alpha);
  return out;
}

Model InitModel(const ModelConfig &cfg, uint64_t seed) {
  RandomStream rng(seed);
  Model model;
  model.cfg = cfg;
  RandomStream enc_rng = rng.Fork(1);
  model.encoder =
      InitEncoder(cfg.feature_dim, cfg.trunk_hidden, cfg.mva, cfg.d, &enc_rng);
  RandomStream head_rng = rng.Fork(2);
  model.head = InitSharedHead(cfg.d, cfg.d_out, &head_rng);
  model.prior.z_p = Matrix(1, cfg.d);
  model.prior.L_p = Matrix(1, cfg.d, cfg.mean_pool ? 0.0 : 1.0);
  RandomStream cls_rng = rng.Fork(3);
  model.classifier.W = cls_rng.GaussianMatrix(
      cfg.n_speakers, cfg.d_out, 1.0 / std::sqrt(double(cfg.d_out)));
  model.classifier.b = Matrix(1, cfg.n_speakers);
  model.alpha = Matrix(1, 1, {1.0});
  return model;
}

std::string ModelConfigToJson(const ModelConfig &cfg) {
  nlohmann::json j;
  j["feature_dim"] = cfg.feature_dim;
  j["trunk_hidden"] = cfg.trunk_hidden;
  j["mva"] = {{"heads", cfg.mva.heads},
              {"d_model", cfg.mva.d_model},
              {"d_ff", cfg.mva.d_ff},
              {"layers", cfg.mva.layers}};
  j["d"] = cfg.d;
  j["d_out"] = cfg.d_out;
  j["n_speakers"] = cfg.n_speakers;
  j["precision_mode"] = cfg.precision_mode == PrecisionMode::kSoftplus
                            ? "softplus"
                            : "softmax_over_time";
  j["mean_pool"] = cfg.mean_pool;
  return j.dump();
}

ModelConfig ModelConfigFromJson(const std::string &json) {
  nlohmann::json j = nlohmann::json::parse(json);
  ModelConfig cfg;
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.trunk_hidden = j.at("trunk_hidden").get<int>();
  cfg.mva.heads = j.at("mva").at("heads").get<int>();
  cfg.mva.d_model = j.at("mva").at("d_model").get<int>();
  cfg.mva.d_ff = j.at("mva").at("d_ff").get<int>();
  cfg.mva.layers = j.at("mva").at("layers").get<int>();
  cfg.d = j.at("d").get<int>();
  cfg.d_out = j.at("d_out").get<int>();
  cfg.n_speakers = j.at("n_speakers").get<int>();
  cfg.precision_mode = j.at("precision_mode").get<std::string>() == "softplus"
                           ? PrecisionMode::kSoftplus
                           : PrecisionMode::kSoftmaxOverTime;
  cfg.mean_pool = j.at("mean_pool").get<bool>();
  return cfg;
}

Checkpoint ModelToCheckpoint(Model &model) {
  Checkpoint ckpt;
  for (auto &[name, mat] : model.Params()) ckpt.arrays.emplace_back(name, *mat);
  ckpt.arrays.emplace_back("head.mu_bn", model.head.mu_bn);
  ckpt.arrays.emplace_back("head.sigma_bn", model.head.sigma_bn);
  ckpt.config_json = ModelConfigToJson(model.cfg);
  return ckpt;
}

Model ModelFromCheckpoint(const Checkpoint &ckpt) {
  Model model = InitModel(ModelConfigFromJson(ckpt.config_json), 0);
  for (auto &[name, mat] : model.Params()) {
    const Matrix &src = FindArray(ckpt, name);
    if (!src.SameShape(*mat))
      throw std::runtime_error("ModelFromCheckpoint: shape mismatch at " + name);
    *mat = src;
  }
  model.head.mu_bn = FindArray(ckpt, "head.mu_bn");
  model.head.sigma_bn = FindArray(ckpt, "head.sigma_bn");
  return model;
}

static FrameGaussians FramesFromFeatures(const Model &model,
                                         const Matrix &features) {
  FrameOutputs out = EncodeFrames(FrameFeatures{features}, model.encoder);
  FrameGaussians frames;
  frames.z = out.z;
  if (model.cfg.mean_pool) {
    frames.L = Matrix(out.z.Rows(), out.z.Cols(), 1.0);
  } else {
    frames.L = PrecisionFromLogits(out.logit, model.cfg.precision_mode);
  }
  return frames;
}

PosteriorGaussian ExtractPosterior(const Model &model, const Matrix &features) {
  return GaussianPosterior(FramesFromFeatures(model, features), model.prior);
}

EmbeddingWithUncertainty ExtractEmbedding(const Model &model,
                                          const Matrix &features) {
  PosteriorGaussian post = ExtractPosterior(model, features);
  EmbeddingWithUncertainty emb;
  emb.phi_s = PropagateMean(post, model.head);
  emb.sigma_s = PropagateVariance(post, model.head);
  return emb;
}

ModelTensors UploadModel(ad::Graph *g, const Model &model, bool rg) {
  ModelTensors mt;
  size_t first = g->NumNodes();
  mt.enc = UploadEncoder(g, model.encoder, rg);
  mt.head = UploadHead(g, model.head, rg);
  mt.W = g->Input(model.classifier.W, rg);
  mt.alpha = g->Input(model.alpha, rg);
  size_t last = g->NumNodes();
  // Inputs are created in the exact order Model::Params() lists them.
  for (size_t id = first; id < last; ++id)
    mt.ordered.push_back(ad::Tensor{static_cast<int>(id)});
  return mt;
}

PooledTensors ModelForwardGraph(ad::Graph *g, const Model &model,
                                const ModelTensors &mt,
                                const Matrix &features) {
  ad::Tensor x = g->Input(features);
  FrameOutputTensors enc_out = EncodeFramesGraph(g, x, mt.enc);
  if (model.cfg.mean_pool)
    return MeanPoolGraph(g, enc_out.z, model.head, mt.head);
  return PoolGraph(g, enc_out.z, enc_out.logit, model.cfg.precision_mode,
                   model.prior, model.head, mt.head);
}

}  // namespace uase

// uase/model.h
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

#ifndef UASE_MODEL_H_
#define UASE_MODEL_H_

#include <string>

#include "uase/checkpoint.h"
#include "uase/encoder.h"
#include "uase/losses.h"
#include "uase/pooling.h"

namespace uase {

// The full extractor: frame encoder -> posterior (or mean) pooling -> shared
// head, plus the classifier and the learnable scoring factor alpha.

struct ModelConfig {
  int feature_dim = 20;
  int trunk_hidden = 64;
  MVAConfig mva;  // mva.d_model is the trunk output width
  int d = 16;     // frame representation / posterior dim
  int d_out = 16; // embedding dim
  int n_speakers = 20;
  PrecisionMode precision_mode = PrecisionMode::kSoftplus;
  bool mean_pool = false;  // unit frame precisions + vanishing prior
};

struct Model {
  ModelConfig cfg;
  EncoderParams encoder;
  SharedHeadParams head;
  PriorParams prior;            // mean 0, precision 1 per dimension
  ClassifierWeights classifier;
  Matrix alpha;                 // 1x1, init 1

  /// Trainable parameters in a fixed deterministic order.
  NamedParams Params();
};

Model InitModel(const ModelConfig &cfg, uint64_t seed);

Checkpoint ModelToCheckpoint(Model &model);
Model ModelFromCheckpoint(const Checkpoint &ckpt);

std::string ModelConfigToJson(const ModelConfig &cfg);
ModelConfig ModelConfigFromJson(const std::string &json);

/// Inference-path embedding extraction with frozen batch statistics.
EmbeddingWithUncertainty ExtractEmbedding(const Model &model,
                                          const Matrix &features);

/// Posterior (pre-head) statistics for a single utterance, inference path.
PosteriorGaussian ExtractPosterior(const Model &model, const Matrix &features);

// Tape-side model.  `ordered` aligns with Model::Params().
struct ModelTensors {
  EncoderTensors enc;
  HeadTensors head;
  ad::Tensor W;
  ad::Tensor alpha;
  std::vector<ad::Tensor> ordered;
};

ModelTensors UploadModel(ad::Graph *g, const Model &model, bool requires_grad);

/// Forward through encoder and pooling on the tape.
PooledTensors ModelForwardGraph(ad::Graph *g, const Model &model,
                                const ModelTensors &mt,
                                const Matrix &features);

}  // namespace uase

#endif  // UASE_MODEL_H_

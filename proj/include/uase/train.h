// uase/train.h
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

#ifndef UASE_TRAIN_H_
#define UASE_TRAIN_H_

#include <string>
#include <vector>

#include "uase/dataset.h"
#include "uase/losses.h"
#include "uase/model.h"

namespace uase {

// Desk-scale training loop: mini-batch momentum SGD through
// encoder -> pooling -> loss, with the margin / scale / SVL-weight schedules,
// per-epoch checkpoints, and deterministic telemetry.

struct ScaleSchedule {
  double start = 32.0;
  double end = 32.0;  // equal endpoints = constant schedule
};

struct TrainingConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool uaam = false;  // uncertainty-aware margin softmax instead of plain
  bool svl = false;   // variance-supervision loss added after psi_svl
  MarginScheduleConfig margin{0.2, 4, 8};  // paper breakpoints {20,40} of 150
                                           // rescaled to 30 epochs
  ScaleSchedule scale;
  SVLConfig svl_cfg{0.05, 8, 30, 1.0, CentroidMode::kEpoch};
  LambdaVariant lambda_variant;
  uint64_t seed = 1;
  ModelConfig model;
  // Pre-mode centroid source: embeddings of a frozen checkpoint.  Empty means
  // "freeze centroids from the model state at the first SVL epoch".
  std::string pre_centroid_checkpoint;
};

double ScaleAt(int epoch, int epochs, const ScaleSchedule &schedule);

struct EpochTelemetry {
  int epoch = 0;
  double margin = 0.0;
  double kappa = 0.0;
  double scale = 0.0;
  double loss_class = 0.0;
  double loss_svl = 0.0;
  double loss_total = 0.0;
  double mean_s_u = 0.0;
  double mean_sigma = 0.0;
  double mean_dcos = 0.0;
  long clamp_count = 0;
};

struct TrainResult {
  Model model;  // checkpoint average of the last k epochs
  std::vector<EpochTelemetry> epochs;
  std::vector<std::string> checkpoint_prefixes;  // one per epoch, in order
};

/// Runs training, writing per-epoch checkpoints, steps.csv and epochs.csv
/// under out_dir.  Byte-identical outputs for identical (dataset, config)
/// regardless of thread count.  Throws on NaN loss with epoch/step context.
TrainResult Train(const Dataset &dataset, const TrainingConfig &cfg,
                  const std::string &out_dir, int checkpoint_average_k = 3,
                  bool parallel = true);

/// Embeddings for every utterance, dataset order, inference path.
std::vector<EmbeddingWithUncertainty> ExtractEmbeddings(const Model &model,
                                                        const Dataset &dataset,
                                                        bool parallel = true);

/// Embedding export: "id,d_out,phi...,sigma..." CSV rows.
void WriteEmbeddingsCsv(const std::string &path,
                        const std::vector<EmbeddingWithUncertainty> &embs);

/// Per-sample batch gradient kernel (exposed for the serial/parallel
/// equivalence test and the benchmark).  Returns the summed gradient over the
/// batch in `grad_sum` (aligned with model.Params()) and per-sample losses.
struct BatchStats {
  std::vector<double> class_loss, svl_loss, s_u, mean_sigma, dcos;
  std::vector<int> clamps;
  std::vector<Matrix> phi;    // posterior mean per sample (1 x d)
  std::vector<Matrix> phi_s;  // embedding per sample
  std::vector<Matrix> sigma_s;
};

void BatchGradients(Model &model, const Dataset &dataset,
                    const std::vector<int> &batch_indices, double s, double m,
                    bool uaam, const LambdaVariant &variant, double kappa,
                    const CentroidTable *centroids, double alpha,
                    std::vector<Matrix> *grad_sum, BatchStats *stats,
                    bool parallel);

}  // namespace uase

#endif  // UASE_TRAIN_H_

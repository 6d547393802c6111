// uase/evaluate.h
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

#ifndef UASE_EVALUATE_H_
#define UASE_EVALUATE_H_

#include <string>
#include <vector>

#include "uase/dataset.h"
#include "uase/model.h"
#include "uase/scoring.h"
#include "uase/train.h"

namespace uase {

// Trial-list evaluation: embeddings -> scores -> EER/minDCF per rho option.

enum class RhoOption { kZero, kInvD, kAlpha, kOne };

/// Parses "0", "inv_d", "alpha" or "1".
RhoOption ParseRho(const std::string &name);
std::string RhoName(RhoOption opt);
double RhoValue(RhoOption opt, int d_out, double alpha);

struct EvalMetrics {
  std::string rho_name;
  double rho = 0.0;
  double eer = 0.0;
  double min_dcf = 0.0;
  int n_trials = 0;
  std::string det_points_path;
};

std::string MetricsToJson(const EvalMetrics &metrics);

/// Balanced trial list over the dataset: per speaker, `targets` same-speaker
/// pairs and `nontargets` cross-speaker pairs, sampled deterministically.
std::vector<Trial> MakeTrials(const Dataset &dataset, int targets,
                              int nontargets, uint64_t seed);

/// Scores every trial with uncertainty-aware cosine at the given rho.
/// Embeddings are resolved by utterance id; unresolved ids throw.
ScoreSet ScoreTrials(const std::vector<EmbeddingWithUncertainty> &embeddings,
                     const std::vector<Trial> &trials, double rho,
                     bool parallel = true);

/// Full evaluation for one rho option.  Writes "<out_prefix>.scores" and
/// "<out_prefix>.det.csv" when out_prefix is nonempty.
EvalMetrics Evaluate(const Model &model, const Dataset &dataset,
                     const std::vector<Trial> &trials, RhoOption rho,
                     const std::string &out_prefix = "", bool parallel = true);

}  // namespace uase

#endif  // UASE_EVALUATE_H_

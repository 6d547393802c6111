// uase/analyze.h
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

#ifndef UASE_ANALYZE_H_
#define UASE_ANALYZE_H_

#include <string>
#include <vector>

#include "uase/dataset.h"
#include "uase/losses.h"
#include "uase/model.h"

namespace uase {

// Post-hoc analyses of a trained model: corruption vs frame precision,
// uncertainty vs difficulty, uncertainty vs duration, per-epoch scale
// distributions and per-utterance uncertainty trajectories, all emitted as
// CSV.

struct PrecisionProfile {
  std::vector<double> segment_mean;  // mean frame precision per segment
  double spearman = 0.0;             // rank correlation vs segment index
};

/// Mean frame precision (channel-averaged) per probe segment.  The probe's
/// segments carry strictly increasing corruption, so a working estimator
/// yields a rank-decreasing profile.
PrecisionProfile FramePrecisionProfile(const Model &model, const Matrix &probe,
                                       const std::vector<int> &segment_of_frame);

struct ScatterStats {
  std::vector<double> x, y;
  double corr = 0.0;
};

/// Mean diag sigma_s per utterance against the detached cosine gap, with
/// Pearson correlation.
ScatterStats SigmaVsDcos(const Model &model, const Dataset &dataset,
                         bool parallel = true);

/// Mean diag sigma_s against utterance frame count, Pearson.
ScatterStats SigmaVsFrames(const Model &model, const Dataset &dataset,
                           bool parallel = true);

/// Per-utterance uncertainty scale s_u under the given bias variant.
std::vector<double> SampleScales(const Model &model, const Dataset &dataset,
                                 const LambdaVariant &variant,
                                 bool parallel = true);

struct AnalyzeReport {
  PrecisionProfile profile;
  ScatterStats sigma_dcos;
  ScatterStats sigma_frames;
  std::vector<std::string> files;  // emitted CSV paths
};

/// Runs every analysis against `model` and, when `epoch_prefixes` is
/// nonempty, the per-epoch scale/uncertainty trajectories across those
/// checkpoints.  Writes CSVs under out_dir.  Throws if the model contains
/// non-finite parameters.
AnalyzeReport Analyze(const Model &model, const Dataset &dataset,
                      const std::vector<std::string> &epoch_prefixes,
                      const std::string &out_dir, bool parallel = true);

/// Epoch checkpoint prefixes ("<dir>/epoch_NNN") found in a training output
/// directory, sorted.
std::vector<std::string> FindEpochCheckpoints(const std::string &run_dir);

}  // namespace uase

#endif  // UASE_ANALYZE_H_

// uase/scoring.h
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

#ifndef UASE_SCORING_H_
#define UASE_SCORING_H_

#include <string>
#include <vector>

#include "uase/matrix.h"
#include "uase/pooling.h"

namespace uase {

// Verification-trial scoring: plain and uncertainty-aware cosine, equal error
// rate, minimum detection cost, and the detection error tradeoff curve.

struct Trial {
  std::string enroll_id;
  std::string test_id;
  bool is_target = false;
};

struct ScoreSet {
  std::vector<double> scores;
  std::vector<bool> labels;  // true = target
  double rho = 0.0;
};

struct DETPoint {
  double threshold;
  double far;  // false acceptance rate among non-targets
  double frr;  // false rejection rate among targets
};

/// Plain cosine similarity; throws on a zero vector.
double Cosine(const Matrix &a, const Matrix &b);

/// <phi2, phi1> / (sqrt(phi2^T (I + rho S2)^-1 phi2) sqrt(phi1^T (I + rho
/// S1)^-1 phi1)), diagonal inverses.  rho = 0 or zero covariances reduce this
/// to the plain cosine.  Self-scores may exceed 1 when rho > 0.
double UncertaintyCosine(const EmbeddingWithUncertainty &e1,
                         const EmbeddingWithUncertainty &e2, double rho);

/// Equal error rate via a sweep over the pooled score positions with linear
/// interpolation at the FAR/FRR crossing.  Throws if either class is absent.
double Eer(const ScoreSet &set);

/// min over thresholds of c_miss p_t FRR + c_fa (1-p_t) FAR, normalized by
/// min(c_miss p_t, c_fa (1-p_t)).
double MinDcf(const ScoreSet &set, double p_target = 0.01,
              double c_miss = 1.0, double c_fa = 1.0);

/// (FAR, FRR) at every distinct score threshold, endpoints (1,0) and (0,1)
/// included; FAR nonincreasing and FRR nondecreasing along the output.
std::vector<DETPoint> DetCurve(const ScoreSet &set);

// File interfaces: "enroll_id test_id {target|nontarget}" trial lists and
// "enroll_id test_id score" score files.
std::vector<Trial> ReadTrialList(const std::string &path);
void WriteTrialList(const std::string &path, const std::vector<Trial> &trials);
void WriteScores(const std::string &path, const std::vector<Trial> &trials,
                 const std::vector<double> &scores);

}  // namespace uase

#endif  // UASE_SCORING_H_

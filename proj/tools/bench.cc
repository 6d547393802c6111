// tools/bench.cc
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
//
// Serial vs OpenMP timing of the two data-parallel kernels: per-sample batch
// gradients and trial scoring.

#include <chrono>
#include <cstdio>

#include "uase/evaluate.h"
#include "uase/parallel.h"
#include "uase/train.h"

using namespace uase;
using Clock = std::chrono::steady_clock;

static double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main() {
  SyntheticDatasetConfig dcfg;
  Dataset dataset = GenerateDataset(dcfg);
  TrainingConfig tcfg;
  Model model = InitModel(tcfg.model, 1);

  std::vector<int> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(i);
  std::vector<Matrix> grads;
  BatchStats stats;
  LambdaVariant variant;

  std::printf("threads available: %d\n", MaxThreads());

  for (bool parallel : {false, true}) {
    Clock::time_point t0 = Clock::now();
    for (int rep = 0; rep < 3; ++rep)
      BatchGradients(model, dataset, batch, 32.0, 0.1, true, variant, 0.0,
                     nullptr, 1.0, &grads, &stats, parallel);
    Clock::time_point t1 = Clock::now();
    std::printf("batch_gradients (B=64, 3 reps)  %s  %.3f s\n",
                parallel ? "parallel" : "serial  ", Seconds(t0, t1));
  }

  std::vector<EmbeddingWithUncertainty> embs = ExtractEmbeddings(model, dataset);
  std::vector<Trial> trials = MakeTrials(dataset, 200, 200, 7);
  for (bool parallel : {false, true}) {
    Clock::time_point t0 = Clock::now();
    ScoreSet set;
    for (int rep = 0; rep < 50; ++rep)
      set = ScoreTrials(embs, trials, 1.0, parallel);
    Clock::time_point t1 = Clock::now();
    std::printf("score_trials (%zu trials, 50 reps)  %s  %.3f s\n",
                trials.size(), parallel ? "parallel" : "serial  ",
                Seconds(t0, t1));
  }

  for (bool parallel : {false, true}) {
    Clock::time_point t0 = Clock::now();
    std::vector<EmbeddingWithUncertainty> e =
        ExtractEmbeddings(model, dataset, parallel);
    Clock::time_point t1 = Clock::now();
    std::printf("extract_embeddings (%zu utts)  %s  %.3f s\n",
                e.size(), parallel ? "parallel" : "serial  ", Seconds(t0, t1));
  }
  return 0;
}

// uase/dataset.h
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

#ifndef UASE_DATASET_H_
#define UASE_DATASET_H_

#include <string>
#include <vector>

#include "uase/matrix.h"
#include "uase/random.h"

namespace uase {

// Synthetic multi-speaker data.  Each speaker is an isotropic mean vector;
// each utterance adds per-frame noise at its assigned corruption level, so
// corruption varies across utterances while staying deterministic under the
// seed.

struct SyntheticDatasetConfig {
  int n_speakers = 20;
  int utts_per_speaker = 20;
  int min_frames = 30;
  int max_frames = 60;
  int feature_dim = 20;
  double speaker_spread = 3.0;
  // Strictly increasing per-segment corruption intensities, cycled across
  // utterances of a speaker.
  std::vector<double> frame_noise_levels = {0.2, 0.6, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> mask_fractions = {0.0};
  uint64_t seed = 1;
};

struct Utterance {
  std::string id;
  int speaker = 0;
  double noise_level = 0.0;
  double mask_fraction = 0.0;
  Matrix features;  // T x F
};

struct Dataset {
  SyntheticDatasetConfig cfg;
  std::vector<Utterance> utterances;
  std::vector<Matrix> speaker_means;  // 1 x F each
};

Dataset GenerateDataset(const SyntheticDatasetConfig &cfg);

enum class CorruptMode { kNoise, kMask };

/// Noise mode adds zero-mean Gaussian noise of the given level to the frame
/// range [begin, end); mask mode zeroes a contiguous `fraction` of frames
/// starting at `begin`.  The input is untouched.
Matrix Corrupt(const Matrix &utterance, CorruptMode mode, double amount,
               uint64_t seed, int begin = 0, int end = -1);

/// Long probe utterance made of `n_segments` equal segments with strictly
/// increasing corruption, mirroring a clean-to-destroyed sweep.  Returns the
/// features and fills segment boundaries.
Matrix MakeCorruptionProbe(const SyntheticDatasetConfig &cfg,
                           const std::vector<double> &segment_levels,
                           int frames_per_segment, uint64_t seed,
                           std::vector<int> *segment_of_frame);

void SaveDataset(const std::string &dir, const Dataset &dataset);
Dataset LoadDataset(const std::string &dir);

/// Index of the utterance with the given id; throws if unresolved.
int FindUtterance(const Dataset &dataset, const std::string &id);

}  // namespace uase

#endif  // UASE_DATASET_H_

// uase/checkpoint.h
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

#ifndef UASE_CHECKPOINT_H_
#define UASE_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "uase/matrix.h"

namespace uase {

// Checkpoint format: <prefix>.bin holds the flat arrays as little-endian
// 64-bit floats, in manifest order; <prefix>.json is the manifest with array
// names/shapes and an arbitrary config object.

struct Checkpoint {
  std::vector<std::pair<std::string, Matrix>> arrays;
  std::string config_json;  // serialized config object
};

void SaveCheckpoint(const std::string &prefix, const Checkpoint &ckpt);
Checkpoint LoadCheckpoint(const std::string &prefix);

/// Elementwise arithmetic mean over checkpoints with identical layouts.
/// Config is taken from the last one.
Checkpoint AverageCheckpoints(const std::vector<Checkpoint> &ckpts);

const Matrix &FindArray(const Checkpoint &ckpt, const std::string &name);

}  // namespace uase

#endif  // UASE_CHECKPOINT_H_

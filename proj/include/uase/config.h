// uase/config.h
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

#ifndef UASE_CONFIG_H_
#define UASE_CONFIG_H_

#include <map>
#include <string>

#include "uase/dataset.h"
#include "uase/train.h"

namespace uase {

// Flat key=value configuration with [section] headers, '#' and ';' comments.

using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData ParseIni(const std::string &text);
IniData ReadIniFile(const std::string &path);

struct HarnessConfig {
  SyntheticDatasetConfig dataset;
  TrainingConfig training;
  int checkpoint_average_k = 3;
};

/// Maps [dataset], [model] and [training] sections onto the config structs.
/// Unknown keys raise; missing keys keep defaults.
HarnessConfig HarnessConfigFromIni(const IniData &ini);
HarnessConfig LoadHarnessConfig(const std::string &path);

}  // namespace uase

#endif  // UASE_CONFIG_H_

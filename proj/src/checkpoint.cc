// uase/checkpoint.cc
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

#include "uase/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace uase {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void SaveCheckpoint(const std::string &prefix, const Checkpoint &ckpt) {
  nlohmann::json manifest;
  manifest["format"] = "uase-ckpt-v1";
  manifest["data"] = prefix.substr(prefix.find_last_of('/') + 1) + ".bin";
  nlohmann::json arrays = nlohmann::json::array();
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("SaveCheckpoint: cannot open " + prefix + ".bin");
  for (const auto &[name, mat] : ckpt.arrays) {
    arrays.push_back({{"name", name}, {"rows", mat.Rows()}, {"cols", mat.Cols()}});
    bin.write(reinterpret_cast<const char *>(mat.Data().data()),
              static_cast<std::streamsize>(mat.Size() * sizeof(double)));
  }
  manifest["arrays"] = std::move(arrays);
  manifest["config"] = ckpt.config_json.empty()
                           ? nlohmann::json::object()
                           : nlohmann::json::parse(ckpt.config_json);
  std::ofstream js(prefix + ".json");
  if (!js) throw std::runtime_error("SaveCheckpoint: cannot open " + prefix + ".json");
  js << manifest.dump(2) << '\n';
}

Checkpoint LoadCheckpoint(const std::string &prefix_in) {
  std::string prefix = prefix_in;
  if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json")
    prefix = prefix.substr(0, prefix.size() - 5);
  std::ifstream js(prefix + ".json");
  if (!js) throw std::runtime_error("LoadCheckpoint: cannot open " + prefix + ".json");
  nlohmann::json manifest = nlohmann::json::parse(js);
  std::ifstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("LoadCheckpoint: cannot open " + prefix + ".bin");
  Checkpoint ckpt;
  for (const auto &entry : manifest.at("arrays")) {
    int rows = entry.at("rows").get<int>();
    int cols = entry.at("cols").get<int>();
    Matrix mat(rows, cols);
    bin.read(reinterpret_cast<char *>(mat.Data().data()),
             static_cast<std::streamsize>(mat.Size() * sizeof(double)));
    if (!bin)
      throw std::runtime_error("LoadCheckpoint: truncated data file for " +
                               prefix);
    ckpt.arrays.emplace_back(entry.at("name").get<std::string>(),
                             std::move(mat));
  }
  ckpt.config_json = manifest.value("config", nlohmann::json::object()).dump();
  return ckpt;
}

Checkpoint AverageCheckpoints(const std::vector<Checkpoint> &ckpts) {
  if (ckpts.empty())
    throw std::invalid_argument("AverageCheckpoints: empty input");
  Checkpoint avg = ckpts.back();
  for (auto &[name, mat] : avg.arrays) mat.SetZero();
  for (const Checkpoint &c : ckpts) {
    if (c.arrays.size() != avg.arrays.size())
      throw std::invalid_argument("AverageCheckpoints: layout mismatch");
    for (size_t i = 0; i < c.arrays.size(); ++i) {
      if (c.arrays[i].first != avg.arrays[i].first ||
          !c.arrays[i].second.SameShape(avg.arrays[i].second))
        throw std::invalid_argument("AverageCheckpoints: array mismatch at " +
                                    c.arrays[i].first);
      avg.arrays[i].second.AddScaled(c.arrays[i].second, 1.0);
    }
  }
  for (auto &[name, mat] : avg.arrays)
    mat.Scale(1.0 / static_cast<double>(ckpts.size()));
  return avg;
}

const Matrix &FindArray(const Checkpoint &ckpt, const std::string &name) {
  for (const auto &[n, mat] : ckpt.arrays)
    if (n == name) return mat;
  throw std::out_of_range("checkpoint: no array named " + name);
}

}  // namespace uase

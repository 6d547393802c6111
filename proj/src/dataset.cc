// uase/dataset.cc
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

#include "uase/dataset.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace uase {

static void ValidateConfig(const SyntheticDatasetConfig &cfg) {
  if (cfg.n_speakers < 2)
    throw std::invalid_argument("GenerateDataset: need at least 2 speakers");
  if (cfg.utts_per_speaker < 1 || cfg.min_frames < 1 ||
      cfg.max_frames < cfg.min_frames || cfg.feature_dim < 1)
    throw std::invalid_argument("GenerateDataset: invalid config");
  for (size_t i = 1; i < cfg.frame_noise_levels.size(); ++i)
    if (cfg.frame_noise_levels[i] <= cfg.frame_noise_levels[i - 1])
      throw std::invalid_argument(
          "GenerateDataset: noise levels must be strictly increasing");
  for (double f : cfg.mask_fractions)
    if (f < 0.0 || f > 1.0)
      throw std::invalid_argument("GenerateDataset: mask fraction outside [0,1]");
}

Dataset GenerateDataset(const SyntheticDatasetConfig &cfg) {
  ValidateConfig(cfg);
  Dataset data;
  data.cfg = cfg;
  RandomStream root(cfg.seed);
  for (int s = 0; s < cfg.n_speakers; ++s) {
    RandomStream spk_rng = root.Fork(1000 + s);
    data.speaker_means.push_back(
        spk_rng.GaussianMatrix(1, cfg.feature_dim, cfg.speaker_spread));
  }
  int levels = static_cast<int>(cfg.frame_noise_levels.size());
  int fracs = static_cast<int>(cfg.mask_fractions.size());
  for (int s = 0; s < cfg.n_speakers; ++s) {
    for (int u = 0; u < cfg.utts_per_speaker; ++u) {
      RandomStream rng =
          root.Fork(static_cast<uint64_t>(s) * 100003 + u + 7);
      Utterance utt;
      char id[64];
      std::snprintf(id, sizeof(id), "spk%03d_utt%03d", s, u);
      utt.id = id;
      utt.speaker = s;
      utt.noise_level = cfg.frame_noise_levels.empty()
                            ? 0.0
                            : cfg.frame_noise_levels[u % levels];
      utt.mask_fraction =
          cfg.mask_fractions.empty() ? 0.0 : cfg.mask_fractions[u % fracs];
      int T = cfg.min_frames +
              static_cast<int>(rng.Below(cfg.max_frames - cfg.min_frames + 1));
      utt.features = Matrix(T, cfg.feature_dim);
      for (int t = 0; t < T; ++t)
        for (int f = 0; f < cfg.feature_dim; ++f)
          utt.features(t, f) =
              data.speaker_means[s](0, f) + utt.noise_level * rng.Gaussian();
      if (utt.mask_fraction > 0.0) {
        int masked = static_cast<int>(utt.mask_fraction * T + 0.5);
        int begin = masked >= T ? 0 : static_cast<int>(rng.Below(T - masked + 1));
        for (int t = begin; t < begin + masked && t < T; ++t)
          for (int f = 0; f < cfg.feature_dim; ++f) utt.features(t, f) = 0.0;
      }
      data.utterances.push_back(std::move(utt));
    }
  }
  return data;
}

Matrix Corrupt(const Matrix &utterance, CorruptMode mode, double amount,
               uint64_t seed, int begin, int end) {
  int T = utterance.Rows();
  if (end < 0) end = T;
  if (begin < 0 || end > T || begin > end)
    throw std::invalid_argument("Corrupt: bad frame range");
  Matrix out = utterance;
  if (mode == CorruptMode::kNoise) {
    if (amount < 0.0) throw std::invalid_argument("Corrupt: negative level");
    if (amount == 0.0) return out;
    RandomStream rng(seed);
    for (int t = begin; t < end; ++t)
      for (int f = 0; f < out.Cols(); ++f)
        out(t, f) += amount * rng.Gaussian();
    return out;
  }
  if (amount < 0.0 || amount > 1.0)
    throw std::invalid_argument("Corrupt: fraction outside [0,1]");
  int span = end - begin;
  int masked = static_cast<int>(amount * span + 0.5);
  if (amount == 1.0) masked = span;
  for (int t = begin; t < begin + masked; ++t)
    for (int f = 0; f < out.Cols(); ++f) out(t, f) = 0.0;
  return out;
}

Matrix MakeCorruptionProbe(const SyntheticDatasetConfig &cfg,
                           const std::vector<double> &segment_levels,
                           int frames_per_segment, uint64_t seed,
                           std::vector<int> *segment_of_frame) {
  RandomStream root(seed);
  Matrix mean = root.GaussianMatrix(1, cfg.feature_dim, cfg.speaker_spread);
  int n_seg = static_cast<int>(segment_levels.size());
  int T = n_seg * frames_per_segment;
  Matrix probe(T, cfg.feature_dim);
  if (segment_of_frame) segment_of_frame->assign(T, 0);
  for (int seg = 0; seg < n_seg; ++seg) {
    for (int t = seg * frames_per_segment; t < (seg + 1) * frames_per_segment;
         ++t) {
      for (int f = 0; f < cfg.feature_dim; ++f)
        probe(t, f) = mean(0, f) + segment_levels[seg] * root.Gaussian();
      if (segment_of_frame) (*segment_of_frame)[t] = seg;
    }
  }
  return probe;
}

void SaveDataset(const std::string &dir, const Dataset &dataset) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "uase-data-v1";
  manifest["config"] = {
      {"n_speakers", dataset.cfg.n_speakers},
      {"utts_per_speaker", dataset.cfg.utts_per_speaker},
      {"min_frames", dataset.cfg.min_frames},
      {"max_frames", dataset.cfg.max_frames},
      {"feature_dim", dataset.cfg.feature_dim},
      {"speaker_spread", dataset.cfg.speaker_spread},
      {"frame_noise_levels", dataset.cfg.frame_noise_levels},
      {"mask_fractions", dataset.cfg.mask_fractions},
      {"seed", dataset.cfg.seed}};
  nlohmann::json utts = nlohmann::json::array();
  std::ofstream bin(dir + "/features.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("SaveDataset: cannot open features.bin");
  for (const Utterance &u : dataset.utterances) {
    utts.push_back({{"id", u.id},
                    {"speaker", u.speaker},
                    {"noise_level", u.noise_level},
                    {"mask_fraction", u.mask_fraction},
                    {"frames", u.features.Rows()}});
    bin.write(reinterpret_cast<const char *>(u.features.Data().data()),
              static_cast<std::streamsize>(u.features.Size() * sizeof(double)));
  }
  manifest["utterances"] = std::move(utts);
  nlohmann::json means = nlohmann::json::array();
  for (const Matrix &m : dataset.speaker_means) means.push_back(m.Data());
  manifest["speaker_means"] = std::move(means);
  std::ofstream js(dir + "/manifest.json");
  if (!js) throw std::runtime_error("SaveDataset: cannot open manifest.json");
  js << manifest.dump(2) << '\n';
}

Dataset LoadDataset(const std::string &dir) {
  std::ifstream js(dir + "/manifest.json");
  if (!js) throw std::runtime_error("LoadDataset: cannot open " + dir +
                                    "/manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(js);
  Dataset data;
  const auto &c = manifest.at("config");
  data.cfg.n_speakers = c.at("n_speakers").get<int>();
  data.cfg.utts_per_speaker = c.at("utts_per_speaker").get<int>();
  data.cfg.min_frames = c.at("min_frames").get<int>();
  data.cfg.max_frames = c.at("max_frames").get<int>();
  data.cfg.feature_dim = c.at("feature_dim").get<int>();
  data.cfg.speaker_spread = c.at("speaker_spread").get<double>();
  data.cfg.frame_noise_levels =
      c.at("frame_noise_levels").get<std::vector<double>>();
  data.cfg.mask_fractions = c.at("mask_fractions").get<std::vector<double>>();
  data.cfg.seed = c.at("seed").get<uint64_t>();
  std::ifstream bin(dir + "/features.bin", std::ios::binary);
  if (!bin) throw std::runtime_error("LoadDataset: cannot open features.bin");
  for (const auto &entry : manifest.at("utterances")) {
    Utterance u;
    u.id = entry.at("id").get<std::string>();
    u.speaker = entry.at("speaker").get<int>();
    u.noise_level = entry.at("noise_level").get<double>();
    u.mask_fraction = entry.at("mask_fraction").get<double>();
    int T = entry.at("frames").get<int>();
    u.features = Matrix(T, data.cfg.feature_dim);
    bin.read(reinterpret_cast<char *>(u.features.Data().data()),
             static_cast<std::streamsize>(u.features.Size() * sizeof(double)));
    if (!bin) throw std::runtime_error("LoadDataset: truncated features.bin");
    data.utterances.push_back(std::move(u));
  }
  for (const auto &mean : manifest.at("speaker_means"))
    data.speaker_means.push_back(
        Matrix::RowVector(mean.get<std::vector<double>>()));
  return data;
}

int FindUtterance(const Dataset &dataset, const std::string &id) {
  for (size_t i = 0; i < dataset.utterances.size(); ++i)
    if (dataset.utterances[i].id == id) return static_cast<int>(i);
  throw std::out_of_range("dataset: unresolved utterance id " + id);
}

}  // namespace uase

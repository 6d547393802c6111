// uase/config.cc
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

#include "uase/config.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uase {

static std::string Trim(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

IniData ParseIni(const std::string &text) {
  IniData out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = Trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key=value");
    if (section.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": key outside a section");
    out[section][Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return out;
}

IniData ReadIniFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseIni(buf.str());
}

static double ToDouble(const std::string &key, const std::string &v) {
  size_t pos = 0;
  double out = std::stod(v, &pos);
  if (pos != v.size())
    throw std::runtime_error("config key " + key + ": bad number '" + v + "'");
  return out;
}

static int ToInt(const std::string &key, const std::string &v) {
  size_t pos = 0;
  int out = std::stoi(v, &pos);
  if (pos != v.size())
    throw std::runtime_error("config key " + key + ": bad integer '" + v + "'");
  return out;
}

static bool ToBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key " + key + ": bad boolean '" + v + "'");
}

static std::vector<double> ToDoubleList(const std::string &key,
                                        const std::string &v) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = Trim(tok);
    if (!tok.empty()) out.push_back(ToDouble(key, tok));
  }
  return out;
}

static void ApplyDataset(const std::map<std::string, std::string> &kv,
                         SyntheticDatasetConfig *cfg) {
  for (const auto &[k, v] : kv) {
    if (k == "n_speakers") cfg->n_speakers = ToInt(k, v);
    else if (k == "utts_per_speaker") cfg->utts_per_speaker = ToInt(k, v);
    else if (k == "min_frames") cfg->min_frames = ToInt(k, v);
    else if (k == "max_frames") cfg->max_frames = ToInt(k, v);
    else if (k == "feature_dim") cfg->feature_dim = ToInt(k, v);
    else if (k == "speaker_spread") cfg->speaker_spread = ToDouble(k, v);
    else if (k == "frame_noise_levels") cfg->frame_noise_levels = ToDoubleList(k, v);
    else if (k == "mask_fractions") cfg->mask_fractions = ToDoubleList(k, v);
    else if (k == "seed") cfg->seed = static_cast<uint64_t>(ToInt(k, v));
    else throw std::runtime_error("config: unknown [dataset] key " + k);
  }
}

static void ApplyModel(const std::map<std::string, std::string> &kv,
                       ModelConfig *cfg) {
  for (const auto &[k, v] : kv) {
    if (k == "feature_dim") cfg->feature_dim = ToInt(k, v);
    else if (k == "trunk_hidden") cfg->trunk_hidden = ToInt(k, v);
    else if (k == "mva_heads") cfg->mva.heads = ToInt(k, v);
    else if (k == "mva_d_model") cfg->mva.d_model = ToInt(k, v);
    else if (k == "mva_d_ff") cfg->mva.d_ff = ToInt(k, v);
    else if (k == "mva_layers") cfg->mva.layers = ToInt(k, v);
    else if (k == "d") cfg->d = ToInt(k, v);
    else if (k == "d_out") cfg->d_out = ToInt(k, v);
    else if (k == "n_speakers") cfg->n_speakers = ToInt(k, v);
    else if (k == "precision_mode") {
      if (v == "softplus") cfg->precision_mode = PrecisionMode::kSoftplus;
      else if (v == "softmax_over_time")
        cfg->precision_mode = PrecisionMode::kSoftmaxOverTime;
      else throw std::runtime_error("config: unknown precision_mode " + v);
    } else if (k == "mean_pool") cfg->mean_pool = ToBool(k, v);
    else throw std::runtime_error("config: unknown [model] key " + k);
  }
}

static LambdaVariant::Tag ParseLambdaTag(const std::string &v) {
  if (v == "identity") return LambdaVariant::kIdentity;
  if (v == "one_minus_dcos") return LambdaVariant::kOneMinusDcos;
  if (v == "half_minus_dcos") return LambdaVariant::kHalfMinusDcos;
  if (v == "const_minus_dcos") return LambdaVariant::kConstMinusDcos;
  throw std::runtime_error("config: unknown lambda_variant " + v);
}

static void ApplyTraining(const std::map<std::string, std::string> &kv,
                          TrainingConfig *cfg, int *avg_k) {
  for (const auto &[k, v] : kv) {
    if (k == "epochs") cfg->epochs = ToInt(k, v);
    else if (k == "batch_size") cfg->batch_size = ToInt(k, v);
    else if (k == "learning_rate") cfg->learning_rate = ToDouble(k, v);
    else if (k == "momentum") cfg->momentum = ToDouble(k, v);
    else if (k == "loss") {
      if (v == "aam") { cfg->uaam = false; cfg->svl = false; }
      else if (v == "uaam") { cfg->uaam = true; cfg->svl = false; }
      else if (v == "aam_svl") { cfg->uaam = false; cfg->svl = true; }
      else if (v == "uaam_svl") { cfg->uaam = true; cfg->svl = true; }
      else throw std::runtime_error("config: unknown loss mode " + v);
    }
    else if (k == "margin_max") cfg->margin.m_max = ToDouble(k, v);
    else if (k == "margin_start") cfg->margin.start_epoch = ToInt(k, v);
    else if (k == "margin_end") cfg->margin.end_epoch = ToInt(k, v);
    else if (k == "scale_start") cfg->scale.start = ToDouble(k, v);
    else if (k == "scale_end") cfg->scale.end = ToDouble(k, v);
    else if (k == "svl_lambda") cfg->svl_cfg.lambda = ToDouble(k, v);
    else if (k == "psi_svl") cfg->svl_cfg.psi_svl = ToInt(k, v);
    else if (k == "psi_max") cfg->svl_cfg.psi_max = ToInt(k, v);
    else if (k == "svl_alpha") cfg->svl_cfg.alpha = ToDouble(k, v);
    else if (k == "centroid_mode") {
      if (v == "pre") cfg->svl_cfg.centroid_mode = CentroidMode::kPre;
      else if (v == "epoch") cfg->svl_cfg.centroid_mode = CentroidMode::kEpoch;
      else throw std::runtime_error("config: unknown centroid_mode " + v);
    }
    else if (k == "lambda_variant") cfg->lambda_variant.tag = ParseLambdaTag(v);
    else if (k == "lambda_c") cfg->lambda_variant.c = ToDouble(k, v);
    else if (k == "seed") cfg->seed = static_cast<uint64_t>(ToInt(k, v));
    else if (k == "checkpoint_average_k") *avg_k = ToInt(k, v);
    else if (k == "pre_centroid_checkpoint") cfg->pre_centroid_checkpoint = v;
    else throw std::runtime_error("config: unknown [training] key " + k);
  }
}

HarnessConfig HarnessConfigFromIni(const IniData &ini) {
  HarnessConfig cfg;
  for (const auto &[section, kv] : ini) {
    if (section == "dataset") ApplyDataset(kv, &cfg.dataset);
    else if (section == "model") ApplyModel(kv, &cfg.training.model);
    else if (section == "training")
      ApplyTraining(kv, &cfg.training, &cfg.checkpoint_average_k);
    else throw std::runtime_error("config: unknown section [" + section + "]");
  }
  return cfg;
}

HarnessConfig LoadHarnessConfig(const std::string &path) {
  return HarnessConfigFromIni(ReadIniFile(path));
}

}  // namespace uase

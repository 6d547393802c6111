// uase/evaluate.cc
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

#include "uase/evaluate.h"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uase/parallel.h"

namespace uase {

RhoOption ParseRho(const std::string &name) {
  if (name == "0") return RhoOption::kZero;
  if (name == "inv_d") return RhoOption::kInvD;
  if (name == "alpha") return RhoOption::kAlpha;
  if (name == "1") return RhoOption::kOne;
  throw std::invalid_argument("unknown rho option " + name);
}

std::string RhoName(RhoOption opt) {
  switch (opt) {
    case RhoOption::kZero: return "0";
    case RhoOption::kInvD: return "inv_d";
    case RhoOption::kAlpha: return "alpha";
    case RhoOption::kOne: return "1";
  }
  throw std::logic_error("unreachable");
}

double RhoValue(RhoOption opt, int d_out, double alpha) {
  switch (opt) {
    case RhoOption::kZero: return 0.0;
    case RhoOption::kInvD: return 1.0 / d_out;
    case RhoOption::kAlpha: return alpha;
    case RhoOption::kOne: return 1.0;
  }
  throw std::logic_error("unreachable");
}

std::string MetricsToJson(const EvalMetrics &metrics) {
  nlohmann::json j;
  j["rho"] = metrics.rho;
  j["rho_name"] = metrics.rho_name;
  j["eer"] = metrics.eer;
  j["min_dcf"] = metrics.min_dcf;
  j["n_trials"] = metrics.n_trials;
  j["det_points_path"] = metrics.det_points_path;
  return j.dump(2);
}

std::vector<Trial> MakeTrials(const Dataset &dataset, int targets,
                              int nontargets, uint64_t seed) {
  std::vector<std::vector<int>> by_speaker(dataset.cfg.n_speakers);
  for (size_t i = 0; i < dataset.utterances.size(); ++i)
    by_speaker[dataset.utterances[i].speaker].push_back(static_cast<int>(i));

  RandomStream rng(seed);
  std::vector<Trial> trials;
  for (int s = 0; s < dataset.cfg.n_speakers; ++s) {
    const std::vector<int> &own = by_speaker[s];
    if (own.size() < 2) continue;
    for (int t = 0; t < targets; ++t) {
      int a = static_cast<int>(rng.Below(own.size()));
      int b = static_cast<int>(rng.Below(own.size() - 1));
      if (b >= a) ++b;
      trials.push_back({dataset.utterances[own[a]].id,
                        dataset.utterances[own[b]].id, true});
    }
    for (int t = 0; t < nontargets; ++t) {
      int other = static_cast<int>(rng.Below(dataset.cfg.n_speakers - 1));
      if (other >= s) ++other;
      if (by_speaker[other].empty()) continue;
      int a = static_cast<int>(rng.Below(own.size()));
      int b = static_cast<int>(rng.Below(by_speaker[other].size()));
      trials.push_back({dataset.utterances[own[a]].id,
                        dataset.utterances[by_speaker[other][b]].id, false});
    }
  }
  return trials;
}

ScoreSet ScoreTrials(const std::vector<EmbeddingWithUncertainty> &embeddings,
                     const std::vector<Trial> &trials, double rho,
                     bool parallel) {
  std::map<std::string, int> index;
  for (size_t i = 0; i < embeddings.size(); ++i)
    index[embeddings[i].id] = static_cast<int>(i);
  auto resolve = [&](const std::string &id) {
    auto it = index.find(id);
    if (it == index.end())
      throw std::out_of_range("ScoreTrials: unresolved utterance id " + id);
    return it->second;
  };

  ScoreSet set;
  set.rho = rho;
  set.scores.assign(trials.size(), 0.0);
  set.labels.assign(trials.size(), false);
  for (size_t i = 0; i < trials.size(); ++i) {
    resolve(trials[i].enroll_id);
    resolve(trials[i].test_id);
    set.labels[i] = trials[i].is_target;
  }
  ParallelFor(
      static_cast<int>(trials.size()),
      [&](int i) {
        const EmbeddingWithUncertainty &e1 =
            embeddings[index.at(trials[i].enroll_id)];
        const EmbeddingWithUncertainty &e2 =
            embeddings[index.at(trials[i].test_id)];
        set.scores[i] = UncertaintyCosine(e1, e2, rho);
      },
      parallel);
  return set;
}

EvalMetrics Evaluate(const Model &model, const Dataset &dataset,
                     const std::vector<Trial> &trials, RhoOption rho,
                     const std::string &out_prefix, bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs =
      ExtractEmbeddings(model, dataset, parallel);
  double rho_value = RhoValue(rho, model.cfg.d_out, model.alpha(0, 0));
  ScoreSet set = ScoreTrials(embs, trials, rho_value, parallel);

  EvalMetrics metrics;
  metrics.rho_name = RhoName(rho);
  metrics.rho = rho_value;
  metrics.eer = Eer(set);
  metrics.min_dcf = MinDcf(set);
  metrics.n_trials = static_cast<int>(trials.size());

  if (!out_prefix.empty()) {
    WriteScores(out_prefix + ".scores", trials, set.scores);
    metrics.det_points_path = out_prefix + ".det.csv";
    std::ofstream det(metrics.det_points_path);
    det << "threshold,far,frr\n";
    char buf[160];
    for (const DETPoint &p : DetCurve(set)) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.far,
                    p.frr);
      det << buf;
    }
  }
  return metrics;
}

}  // namespace uase

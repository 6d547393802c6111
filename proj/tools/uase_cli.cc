// tools/uase_cli.cc
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
// Command-line front end: dataset generation, training, evaluation,
// analysis and checkpoint averaging.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uase/analyze.h"
#include "uase/config.h"
#include "uase/evaluate.h"
#include "uase/train.h"

using namespace uase;

static int RunGenerate(const std::string &config, const std::string &out) {
  HarnessConfig cfg = LoadHarnessConfig(config);
  Dataset dataset = GenerateDataset(cfg.dataset);
  SaveDataset(out, dataset);
  std::vector<Trial> trials = MakeTrials(dataset, 10, 10, cfg.dataset.seed + 31);
  WriteTrialList(out + "/trials.txt", trials);
  std::printf("wrote %zu utterances, %zu trials to %s\n",
              dataset.utterances.size(), trials.size(), out.c_str());
  return 0;
}

static int RunTrain(const std::string &config, const std::string &data,
                    const std::string &out) {
  HarnessConfig cfg = LoadHarnessConfig(config);
  Dataset dataset = LoadDataset(data);
  cfg.training.model.feature_dim = dataset.cfg.feature_dim;
  cfg.training.model.n_speakers = dataset.cfg.n_speakers;
  TrainResult result =
      Train(dataset, cfg.training, out, cfg.checkpoint_average_k);
  const EpochTelemetry &last = result.epochs.back();
  std::printf("trained %d epochs, final loss %.6f, model at %s/final\n",
              cfg.training.epochs, last.loss_total, out.c_str());
  return 0;
}

static int RunEvaluate(const std::string &model_path, const std::string &data,
                       const std::string &trials_path, const std::string &rho,
                       const std::string &out) {
  Model model = ModelFromCheckpoint(LoadCheckpoint(model_path));
  Dataset dataset = LoadDataset(data);
  std::vector<Trial> trials = ReadTrialList(trials_path);
  std::string prefix = out;
  if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json")
    prefix = prefix.substr(0, prefix.size() - 5);
  EvalMetrics metrics =
      Evaluate(model, dataset, trials, ParseRho(rho), prefix);
  std::ofstream js(out);
  js << MetricsToJson(metrics) << '\n';
  std::printf("rho=%s eer=%.4f min_dcf=%.4f over %d trials\n",
              metrics.rho_name.c_str(), metrics.eer, metrics.min_dcf,
              metrics.n_trials);
  return 0;
}

static int RunAnalyze(const std::string &model_path, const std::string &data,
                      const std::string &out) {
  Model model = ModelFromCheckpoint(LoadCheckpoint(model_path));
  Dataset dataset = LoadDataset(data);
  std::string run_dir =
      std::filesystem::path(model_path).parent_path().string();
  std::vector<std::string> epochs;
  if (!run_dir.empty() && std::filesystem::is_directory(run_dir))
    epochs = FindEpochCheckpoints(run_dir);
  AnalyzeReport report = Analyze(model, dataset, epochs, out);
  for (const std::string &f : report.files) std::printf("wrote %s\n", f.c_str());
  std::printf("precision profile spearman %.4f, sigma/dcos pearson %.4f\n",
              report.profile.spearman, report.sigma_dcos.corr);
  return 0;
}

static int RunAvg(int last, const std::string &in, const std::string &out) {
  std::vector<std::string> prefixes = FindEpochCheckpoints(in);
  if (static_cast<int>(prefixes.size()) < last)
    throw std::runtime_error("avg: fewer checkpoints than requested");
  std::vector<Checkpoint> ckpts;
  for (size_t i = prefixes.size() - last; i < prefixes.size(); ++i)
    ckpts.push_back(LoadCheckpoint(prefixes[i]));
  SaveCheckpoint(out, AverageCheckpoints(ckpts));
  std::printf("averaged last %d checkpoints into %s\n", last, out.c_str());
  return 0;
}

int main(int argc, char **argv) {
  CLI::App app{"uncertainty-aware speaker embedding toolkit"};
  app.require_subcommand(1);

  std::string config, data, out, model_path, trials_path, rho = "0";
  int last = 3;

  CLI::App *generate = app.add_subcommand("generate", "synthesize a dataset");
  generate->add_option("--config", config, "config file")->required();
  generate->add_option("--out", out, "output directory")->required();

  CLI::App *train = app.add_subcommand("train", "run the training loop");
  train->add_option("--config", config, "config file")->required();
  train->add_option("--data", data, "dataset directory")->required();
  train->add_option("--out", out, "run output directory")->required();

  CLI::App *evaluate = app.add_subcommand("evaluate", "score a trial list");
  evaluate->add_option("--model", model_path, "checkpoint prefix")->required();
  evaluate->add_option("--data", data, "dataset directory")->required();
  evaluate->add_option("--trials", trials_path, "trial list file")->required();
  evaluate->add_option("--rho", rho, "0|inv_d|alpha|1");
  evaluate->add_option("--out", out, "metrics JSON path")->required();

  CLI::App *analyze = app.add_subcommand("analyze", "emit analysis CSVs");
  analyze->add_option("--model", model_path, "checkpoint prefix")->required();
  analyze->add_option("--data", data, "dataset directory")->required();
  analyze->add_option("--out", out, "output directory")->required();

  CLI::App *avg = app.add_subcommand("avg", "average trailing checkpoints");
  avg->add_option("--last", last, "number of checkpoints")->required();
  avg->add_option("--in", data, "run directory")->required();
  avg->add_option("--out", out, "output checkpoint prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return RunGenerate(config, out);
    if (train->parsed()) return RunTrain(config, data, out);
    if (evaluate->parsed())
      return RunEvaluate(model_path, data, trials_path, rho, out);
    if (analyze->parsed()) return RunAnalyze(model_path, data, out);
    if (avg->parsed()) return RunAvg(last, data, out);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

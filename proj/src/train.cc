// uase/train.cc
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

#include "uase/train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uase/parallel.h"
#include "uase/stats.h"

namespace uase {

double ScaleAt(int epoch, int epochs, const ScaleSchedule &schedule) {
  if (epochs <= 1) return schedule.start;
  double t = static_cast<double>(epoch) / (epochs - 1);
  return schedule.start + (schedule.end - schedule.start) * t;
}

static std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void BatchGradients(Model &model, const Dataset &dataset,
                    const std::vector<int> &batch_indices, double s, double m,
                    bool uaam, const LambdaVariant &variant, double kappa,
                    const CentroidTable *centroids, double alpha,
                    std::vector<Matrix> *grad_sum, BatchStats *stats,
                    bool parallel) {
  (void)alpha;  // alpha rides along inside the model
  int B = static_cast<int>(batch_indices.size());
  NamedParams params = model.Params();
  size_t P = params.size();

  std::vector<std::vector<Matrix>> sample_grads(B);
  stats->class_loss.assign(B, 0.0);
  stats->svl_loss.assign(B, 0.0);
  stats->s_u.assign(B, 1.0);
  stats->mean_sigma.assign(B, 0.0);
  stats->dcos.assign(B, 0.0);
  stats->clamps.assign(B, 0);
  stats->phi.assign(B, Matrix());
  stats->phi_s.assign(B, Matrix());
  stats->sigma_s.assign(B, Matrix());

  ParallelFor(
      B,
      [&](int i) {
        const Utterance &utt = dataset.utterances[batch_indices[i]];
        ad::Graph g;
        ModelTensors mt = UploadModel(&g, model, true);
        PooledTensors pooled = ModelForwardGraph(&g, model, mt, utt.features);

        Matrix phi_s_v = g.Value(pooled.phi_s);
        Matrix sigma_s_v = g.Value(pooled.sigma_s);
        stats->phi[i] = g.Value(pooled.phi);
        stats->phi_s[i] = phi_s_v;
        stats->sigma_s[i] = sigma_s_v;
        double sigma_mean = 0.0;
        for (int c = 0; c < sigma_s_v.Cols(); ++c) sigma_mean += sigma_s_v(0, c);
        stats->mean_sigma[i] = sigma_mean / sigma_s_v.Cols();

        double dcos = DeltaCos(phi_s_v, utt.speaker, model.classifier);
        stats->dcos[i] = dcos;
        int clamps = 0;
        Matrix lam = LambdaDiag(variant, dcos, phi_s_v.Cols(), &clamps);
        stats->clamps[i] = uaam ? clamps : 0;
        if (uaam) stats->s_u[i] = UncertaintyScale(phi_s_v, sigma_s_v, lam);

        ad::Tensor loss = MarginLossGraph(&g, pooled.phi_s, pooled.sigma_s,
                                          utt.speaker, mt.W, s, m, uaam, lam);
        stats->class_loss[i] = g.Value(loss)(0, 0);
        ad::Tensor root = loss;
        if (kappa > 0.0 && centroids != nullptr) {
          auto it = centroids->centroid.find(utt.speaker);
          if (it == centroids->centroid.end())
            throw std::runtime_error("BatchGradients: missing centroid for " +
                                     std::to_string(utt.speaker));
          ad::Tensor svl = SvlSampleGraph(&g, pooled.phi_s, pooled.sigma_s,
                                          mt.alpha, it->second);
          stats->svl_loss[i] = g.Value(svl)(0, 0);
          root = ad::Add(g, loss, ad::Scale(g, svl, kappa));
        }
        g.Backward(root);
        sample_grads[i].reserve(P);
        for (size_t p = 0; p < P; ++p)
          sample_grads[i].push_back(g.Grad(mt.ordered[p]));
      },
      parallel);

  grad_sum->clear();
  grad_sum->reserve(P);
  for (size_t p = 0; p < P; ++p)
    grad_sum->push_back(Matrix(params[p].second->Rows(), params[p].second->Cols()));
  // Fixed sample order keeps the reduction deterministic.
  for (int i = 0; i < B; ++i)
    for (size_t p = 0; p < P; ++p)
      (*grad_sum)[p].AddScaled(sample_grads[i][p], 1.0);
}

std::vector<EmbeddingWithUncertainty> ExtractEmbeddings(const Model &model,
                                                        const Dataset &dataset,
                                                        bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs(dataset.utterances.size());
  ParallelFor(
      static_cast<int>(dataset.utterances.size()),
      [&](int i) {
        embs[i] = ExtractEmbedding(model, dataset.utterances[i].features);
        embs[i].id = dataset.utterances[i].id;
      },
      parallel);
  return embs;
}

void WriteEmbeddingsCsv(const std::string &path,
                        const std::vector<EmbeddingWithUncertainty> &embs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("WriteEmbeddingsCsv: cannot open " + path);
  for (const EmbeddingWithUncertainty &e : embs) {
    out << e.id << ',' << e.phi_s.Cols();
    for (int c = 0; c < e.phi_s.Cols(); ++c) out << ',' << Fmt(e.phi_s(0, c));
    for (int c = 0; c < e.sigma_s.Cols(); ++c) out << ',' << Fmt(e.sigma_s(0, c));
    out << '\n';
  }
}

static CentroidTable CentroidsFromModel(const Model &model,
                                        const Dataset &dataset, bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs =
      ExtractEmbeddings(model, dataset, parallel);
  std::vector<Matrix> vecs;
  std::vector<int> labels;
  vecs.reserve(embs.size());
  for (size_t i = 0; i < embs.size(); ++i) {
    vecs.push_back(embs[i].phi_s);
    labels.push_back(dataset.utterances[i].speaker);
  }
  return BuildCentroids(vecs, labels);
}

static void WriteRunConfig(const std::string &out_dir,
                           const TrainingConfig &cfg, int epochs_done) {
  nlohmann::json j;
  j["epochs"] = cfg.epochs;
  j["epochs_done"] = epochs_done;
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["momentum"] = cfg.momentum;
  j["uaam"] = cfg.uaam;
  j["svl"] = cfg.svl;
  j["margin"] = {{"m_max", cfg.margin.m_max},
                 {"start_epoch", cfg.margin.start_epoch},
                 {"end_epoch", cfg.margin.end_epoch}};
  j["scale"] = {{"start", cfg.scale.start}, {"end", cfg.scale.end}};
  j["svl_cfg"] = {{"lambda", cfg.svl_cfg.lambda},
                  {"psi_svl", cfg.svl_cfg.psi_svl},
                  {"psi_max", cfg.svl_cfg.psi_max},
                  {"centroid_mode",
                   cfg.svl_cfg.centroid_mode == CentroidMode::kPre ? "pre"
                                                                   : "epoch"}};
  j["lambda_variant"] = {{"tag", static_cast<int>(cfg.lambda_variant.tag)},
                         {"c", cfg.lambda_variant.c},
                         {"floor", cfg.lambda_variant.floor}};
  j["seed"] = cfg.seed;
  std::ofstream out(out_dir + "/run.json");
  out << j.dump(2) << '\n';
}

TrainResult Train(const Dataset &dataset, const TrainingConfig &cfg,
                  const std::string &out_dir, int checkpoint_average_k,
                  bool parallel) {
  std::filesystem::create_directories(out_dir);
  Model model = InitModel(cfg.model, cfg.seed);
  NamedParams params = model.Params();
  size_t P = params.size();
  std::vector<Matrix> velocity;
  for (auto &[name, mat] : params) velocity.push_back(Matrix(mat->Rows(), mat->Cols()));

  CentroidTable centroids;
  bool have_centroids = false;
  if (cfg.svl && cfg.svl_cfg.centroid_mode == CentroidMode::kPre &&
      !cfg.pre_centroid_checkpoint.empty()) {
    Model frozen = ModelFromCheckpoint(LoadCheckpoint(cfg.pre_centroid_checkpoint));
    centroids = CentroidsFromModel(frozen, dataset, parallel);
    have_centroids = true;
  }

  RandomStream shuffle_rng = RandomStream(cfg.seed).Fork(42);
  std::vector<int> order(dataset.utterances.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  std::ofstream steps(out_dir + "/steps.csv");
  steps << "epoch,step,loss_class,loss_svl,loss_total,mean_s_u,mean_sigma,"
           "mean_dcos,clamp_count\n";

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double m = MarginAt(epoch, cfg.margin);
    double s = ScaleAt(epoch, cfg.epochs, cfg.scale);
    double kappa = cfg.svl ? KappaAt(epoch, cfg.svl_cfg) : 0.0;

    if (cfg.svl && kappa > 0.0) {
      if (cfg.svl_cfg.centroid_mode == CentroidMode::kEpoch) {
        // Previous-epoch parameters: rebuilt before any update this epoch.
        centroids = CentroidsFromModel(model, dataset, parallel);
        have_centroids = true;
      } else if (!have_centroids) {
        centroids = CentroidsFromModel(model, dataset, parallel);
        have_centroids = true;
      }
    }

    // Fisher-Yates shuffle on the fixed stream.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.Below(i)]);

    EpochTelemetry tel;
    tel.epoch = epoch;
    tel.margin = m;
    tel.kappa = kappa;
    tel.scale = s;
    long n_samples = 0;

    int n_batches =
        (static_cast<int>(order.size()) + cfg.batch_size - 1) / cfg.batch_size;
    for (int step = 0; step < n_batches; ++step) {
      int begin = step * cfg.batch_size;
      int end = std::min<int>(begin + cfg.batch_size,
                              static_cast<int>(order.size()));
      std::vector<int> batch(order.begin() + begin, order.begin() + end);
      int B = static_cast<int>(batch.size());

      std::vector<Matrix> grad_sum;
      BatchStats stats;
      BatchGradients(model, dataset, batch, s, m, cfg.uaam, cfg.lambda_variant,
                     kappa, (cfg.svl && kappa > 0.0) ? &centroids : nullptr,
                     model.alpha(0, 0), &grad_sum, &stats, parallel);

      double cls = Mean(stats.class_loss);
      double svl = Mean(stats.svl_loss);
      double su = Mean(stats.s_u);
      double sig = Mean(stats.mean_sigma);
      double dco = Mean(stats.dcos);
      long clamps = 0;
      for (int c : stats.clamps) clamps += c;
      double total = cls + kappa * svl;
      if (!std::isfinite(total))
        throw std::runtime_error("Train: NaN loss at epoch " +
                                 std::to_string(epoch) + " step " +
                                 std::to_string(step));

      for (size_t p = 0; p < P; ++p) {
        grad_sum[p].Scale(1.0 / B);
        velocity[p].Scale(cfg.momentum);
        velocity[p].AddScaled(grad_sum[p], -cfg.learning_rate);
        params[p].second->AddScaled(velocity[p], 1.0);
      }
      // Keep the uncertainty scaling factor positive.
      model.alpha(0, 0) = std::max(model.alpha(0, 0), 1e-4);

      // Running batch-norm statistics over the posterior means (momentum 0.1).
      int d = model.cfg.d;
      Matrix mean(1, d), var(1, d);
      for (int i = 0; i < B; ++i) mean.AddScaled(stats.phi[i], 1.0 / B);
      for (int i = 0; i < B; ++i)
        for (int c = 0; c < d; ++c) {
          double diff = stats.phi[i](0, c) - mean(0, c);
          var(0, c) += diff * diff / B;
        }
      model.head.mu_bn.Scale(0.9);
      model.head.mu_bn.AddScaled(mean, 0.1);
      model.head.sigma_bn.Scale(0.9);
      model.head.sigma_bn.AddScaled(var, 0.1);

      steps << epoch << ',' << step << ',' << Fmt(cls) << ',' << Fmt(svl)
            << ',' << Fmt(total) << ',' << Fmt(su) << ',' << Fmt(sig) << ','
            << Fmt(dco) << ',' << clamps << '\n';

      tel.loss_class += cls * B;
      tel.loss_svl += svl * B;
      tel.loss_total += total * B;
      tel.mean_s_u += su * B;
      tel.mean_sigma += sig * B;
      tel.mean_dcos += dco * B;
      tel.clamp_count += clamps;
      n_samples += B;
    }

    tel.loss_class /= n_samples;
    tel.loss_svl /= n_samples;
    tel.loss_total /= n_samples;
    tel.mean_s_u /= n_samples;
    tel.mean_sigma /= n_samples;
    tel.mean_dcos /= n_samples;
    result.epochs.push_back(tel);

    char name[64];
    std::snprintf(name, sizeof(name), "/epoch_%03d", epoch);
    std::string prefix = out_dir + name;
    SaveCheckpoint(prefix, ModelToCheckpoint(model));
    result.checkpoint_prefixes.push_back(prefix);
  }

  std::ofstream epochs_csv(out_dir + "/epochs.csv");
  epochs_csv << "epoch,margin,kappa,scale,loss_class,loss_svl,loss_total,"
                "mean_s_u,mean_sigma,mean_dcos,clamp_count\n";
  for (const EpochTelemetry &t : result.epochs)
    epochs_csv << t.epoch << ',' << Fmt(t.margin) << ',' << Fmt(t.kappa) << ','
               << Fmt(t.scale) << ',' << Fmt(t.loss_class) << ','
               << Fmt(t.loss_svl) << ',' << Fmt(t.loss_total) << ','
               << Fmt(t.mean_s_u) << ',' << Fmt(t.mean_sigma) << ','
               << Fmt(t.mean_dcos) << ',' << t.clamp_count << '\n';

  int k = std::min<int>(checkpoint_average_k,
                        static_cast<int>(result.checkpoint_prefixes.size()));
  std::vector<Checkpoint> last;
  for (int i = static_cast<int>(result.checkpoint_prefixes.size()) - k;
       i < static_cast<int>(result.checkpoint_prefixes.size()); ++i)
    last.push_back(LoadCheckpoint(result.checkpoint_prefixes[i]));
  Checkpoint avg = AverageCheckpoints(last);
  SaveCheckpoint(out_dir + "/final", avg);
  result.model = ModelFromCheckpoint(avg);

  WriteRunConfig(out_dir, cfg, cfg.epochs);
  return result;
}

}  // namespace uase

// uase/analyze.cc
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

#include "uase/analyze.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "uase/parallel.h"
#include "uase/stats.h"
#include "uase/train.h"

namespace uase {

static std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

PrecisionProfile FramePrecisionProfile(
    const Model &model, const Matrix &probe,
    const std::vector<int> &segment_of_frame) {
  if (static_cast<int>(segment_of_frame.size()) != probe.Rows())
    throw std::invalid_argument("FramePrecisionProfile: segment map mismatch");
  FrameOutputs out = EncodeFrames(FrameFeatures{probe}, model.encoder);
  Matrix L = model.cfg.mean_pool
                 ? Matrix(out.z.Rows(), out.z.Cols(), 1.0)
                 : PrecisionFromLogits(out.logit, model.cfg.precision_mode);
  int n_seg = 1 + *std::max_element(segment_of_frame.begin(),
                                    segment_of_frame.end());
  PrecisionProfile profile;
  profile.segment_mean.assign(n_seg, 0.0);
  std::vector<int> counts(n_seg, 0);
  for (int t = 0; t < L.Rows(); ++t) {
    double mean = 0.0;
    for (int c = 0; c < L.Cols(); ++c) mean += L(t, c);
    profile.segment_mean[segment_of_frame[t]] += mean / L.Cols();
    ++counts[segment_of_frame[t]];
  }
  std::vector<double> index(n_seg);
  for (int s = 0; s < n_seg; ++s) {
    if (counts[s] == 0)
      throw std::invalid_argument("FramePrecisionProfile: empty segment");
    profile.segment_mean[s] /= counts[s];
    index[s] = s;
  }
  profile.spearman = Correlation(index, profile.segment_mean,
                                 CorrelationKind::kSpearman);
  return profile;
}

static double MeanSigma(const Matrix &sigma_s) {
  double m = 0.0;
  for (int c = 0; c < sigma_s.Cols(); ++c) m += sigma_s(0, c);
  return m / sigma_s.Cols();
}

ScatterStats SigmaVsDcos(const Model &model, const Dataset &dataset,
                         bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs =
      ExtractEmbeddings(model, dataset, parallel);
  ScatterStats stats;
  stats.x.resize(embs.size());
  stats.y.resize(embs.size());
  for (size_t i = 0; i < embs.size(); ++i) {
    stats.x[i] = MeanSigma(embs[i].sigma_s);
    stats.y[i] =
        DeltaCos(embs[i].phi_s, dataset.utterances[i].speaker, model.classifier);
  }
  stats.corr = Correlation(stats.x, stats.y, CorrelationKind::kPearson);
  return stats;
}

ScatterStats SigmaVsFrames(const Model &model, const Dataset &dataset,
                           bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs =
      ExtractEmbeddings(model, dataset, parallel);
  ScatterStats stats;
  stats.x.resize(embs.size());
  stats.y.resize(embs.size());
  for (size_t i = 0; i < embs.size(); ++i) {
    stats.x[i] = dataset.utterances[i].features.Rows();
    stats.y[i] = MeanSigma(embs[i].sigma_s);
  }
  stats.corr = Correlation(stats.x, stats.y, CorrelationKind::kPearson);
  return stats;
}

std::vector<double> SampleScales(const Model &model, const Dataset &dataset,
                                 const LambdaVariant &variant, bool parallel) {
  std::vector<EmbeddingWithUncertainty> embs =
      ExtractEmbeddings(model, dataset, parallel);
  std::vector<double> scales(embs.size());
  for (size_t i = 0; i < embs.size(); ++i) {
    double dcos = DeltaCos(embs[i].phi_s, dataset.utterances[i].speaker,
                           model.classifier);
    Matrix lam = LambdaDiag(variant, dcos, embs[i].phi_s.Cols(), nullptr);
    scales[i] = UncertaintyScale(embs[i].phi_s, embs[i].sigma_s, lam);
  }
  return scales;
}

static void CheckFinite(Model &model) {
  for (auto &[name, mat] : model.Params())
    if (!mat->AllFinite())
      throw std::runtime_error("Analyze: non-finite parameters in " + name);
}

AnalyzeReport Analyze(const Model &model, const Dataset &dataset,
                      const std::vector<std::string> &epoch_prefixes,
                      const std::string &out_dir, bool parallel) {
  Model &mutable_model = const_cast<Model &>(model);
  CheckFinite(mutable_model);
  std::filesystem::create_directories(out_dir);
  AnalyzeReport report;

  std::vector<int> segment_of_frame;
  Matrix probe = MakeCorruptionProbe(dataset.cfg, dataset.cfg.frame_noise_levels,
                                     40, dataset.cfg.seed + 977,
                                     &segment_of_frame);
  report.profile = FramePrecisionProfile(model, probe, segment_of_frame);
  {
    std::string path = out_dir + "/precision_profile.csv";
    std::ofstream out(path);
    out << "segment,mean_precision\n";
    for (size_t s = 0; s < report.profile.segment_mean.size(); ++s)
      out << s << ',' << Fmt(report.profile.segment_mean[s]) << '\n';
    report.files.push_back(path);
  }

  report.sigma_dcos = SigmaVsDcos(model, dataset, parallel);
  {
    std::string path = out_dir + "/sigma_vs_dcos.csv";
    std::ofstream out(path);
    out << "utt_id,mean_sigma,dcos\n";
    for (size_t i = 0; i < report.sigma_dcos.x.size(); ++i)
      out << dataset.utterances[i].id << ',' << Fmt(report.sigma_dcos.x[i])
          << ',' << Fmt(report.sigma_dcos.y[i]) << '\n';
    report.files.push_back(path);
  }

  report.sigma_frames = SigmaVsFrames(model, dataset, parallel);
  {
    std::string path = out_dir + "/sigma_vs_frames.csv";
    std::ofstream out(path);
    out << "utt_id,frames,mean_sigma\n";
    for (size_t i = 0; i < report.sigma_frames.x.size(); ++i)
      out << dataset.utterances[i].id << ',' << Fmt(report.sigma_frames.x[i])
          << ',' << Fmt(report.sigma_frames.y[i]) << '\n';
    report.files.push_back(path);
  }

  {
    std::string path = out_dir + "/correlations.csv";
    std::ofstream out(path);
    out << "analysis,correlation\n";
    out << "precision_profile_spearman," << Fmt(report.profile.spearman) << '\n';
    out << "sigma_dcos_pearson," << Fmt(report.sigma_dcos.corr) << '\n';
    out << "sigma_frames_pearson," << Fmt(report.sigma_frames.corr) << '\n';
    report.files.push_back(path);
  }

  if (!epoch_prefixes.empty()) {
    LambdaVariant identity;
    std::string su_path = out_dir + "/su_by_epoch.csv";
    std::string hist_path = out_dir + "/su_hist.csv";
    std::string traj_path = out_dir + "/sigma_trajectories.csv";
    std::ofstream su(su_path), hist(hist_path), traj(traj_path);
    su << "epoch,utt_id,s_u\n";
    hist << "epoch,bin_lo,bin_hi,count\n";
    traj << "epoch,utt_id,mean_sigma\n";
    for (size_t e = 0; e < epoch_prefixes.size(); ++e) {
      Model m = ModelFromCheckpoint(LoadCheckpoint(epoch_prefixes[e]));
      std::vector<double> scales = SampleScales(m, dataset, identity, parallel);
      for (size_t i = 0; i < scales.size(); ++i)
        su << e << ',' << dataset.utterances[i].id << ',' << Fmt(scales[i])
           << '\n';
      double lo = *std::min_element(scales.begin(), scales.end());
      double hi = *std::max_element(scales.begin(), scales.end());
      if (hi <= lo) hi = lo + 1e-12;
      const int kBins = 20;
      std::vector<int> counts(kBins, 0);
      for (double v : scales) {
        int b = static_cast<int>((v - lo) / (hi - lo) * kBins);
        counts[std::min(b, kBins - 1)]++;
      }
      for (int b = 0; b < kBins; ++b)
        hist << e << ',' << Fmt(lo + (hi - lo) * b / kBins) << ','
             << Fmt(lo + (hi - lo) * (b + 1) / kBins) << ',' << counts[b]
             << '\n';
      std::vector<EmbeddingWithUncertainty> embs =
          ExtractEmbeddings(m, dataset, parallel);
      for (size_t i = 0; i < embs.size(); ++i)
        traj << e << ',' << dataset.utterances[i].id << ','
             << Fmt(MeanSigma(embs[i].sigma_s)) << '\n';
    }
    report.files.push_back(su_path);
    report.files.push_back(hist_path);
    report.files.push_back(traj_path);
  }
  return report;
}

std::vector<std::string> FindEpochCheckpoints(const std::string &run_dir) {
  std::vector<std::string> prefixes;
  for (const auto &entry : std::filesystem::directory_iterator(run_dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("epoch_", 0) == 0 && name.size() > 5 &&
        name.substr(name.size() - 5) == ".json")
      prefixes.push_back(run_dir + "/" + name.substr(0, name.size() - 5));
  }
  std::sort(prefixes.begin(), prefixes.end());
  return prefixes;
}

}  // namespace uase

// uase/scoring.cc
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

#include "uase/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace uase {

double Cosine(const Matrix &a, const Matrix &b) {
  double na = Norm(a), nb = Norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("Cosine: zero vector");
  return Dot(a, b) / (na * nb);
}

double UncertaintyCosine(const EmbeddingWithUncertainty &e1,
                         const EmbeddingWithUncertainty &e2, double rho) {
  if (rho < 0.0) throw std::invalid_argument("UncertaintyCosine: rho < 0");
  auto quad = [rho](const EmbeddingWithUncertainty &e) {
    double acc = 0.0;
    for (int c = 0; c < e.phi_s.Cols(); ++c)
      acc += e.phi_s(0, c) * e.phi_s(0, c) / (1.0 + rho * e.sigma_s(0, c));
    return acc;
  };
  double d1 = quad(e1), d2 = quad(e2);
  if (d1 <= 0.0 || d2 <= 0.0)
    throw std::invalid_argument("UncertaintyCosine: zero denominator");
  return Dot(e2.phi_s, e1.phi_s) / (std::sqrt(d2) * std::sqrt(d1));
}

namespace {

struct SweepPoint {
  double threshold;
  double far;
  double frr;
};

/// (FAR, FRR) at threshold -inf, at every unique score (accept iff score >=
/// threshold), and above the max.  FAR nonincreasing, FRR nondecreasing.
std::vector<SweepPoint> Sweep(const ScoreSet &set) {
  size_t n = set.scores.size();
  if (n == 0 || set.labels.size() != n)
    throw std::invalid_argument("scoring: empty or mismatched score set");
  size_t n_tar = 0;
  for (bool l : set.labels) n_tar += l ? 1 : 0;
  size_t n_non = n - n_tar;
  if (n_tar == 0 || n_non == 0)
    throw std::invalid_argument("scoring: need both target and non-target trials");

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return set.scores[a] < set.scores[b];
  });

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<SweepPoint> points;
  points.push_back({-kInf, 1.0, 0.0});
  // Walking the sorted scores: at threshold u, FAR counts non-targets >= u
  // and FRR counts targets < u.
  size_t tar_below = 0, non_below = 0;
  size_t i = 0;
  while (i < n) {
    double u = set.scores[order[i]];
    points.push_back({u,
                      static_cast<double>(n_non - non_below) / n_non,
                      static_cast<double>(tar_below) / n_tar});
    while (i < n && set.scores[order[i]] == u) {
      if (set.labels[order[i]]) ++tar_below; else ++non_below;
      ++i;
    }
  }
  points.push_back({kInf, 0.0, 1.0});
  return points;
}

}  // namespace

double Eer(const ScoreSet &set) {
  std::vector<SweepPoint> points = Sweep(set);
  for (size_t i = 1; i < points.size(); ++i) {
    double d_prev = points[i - 1].far - points[i - 1].frr;
    double d_cur = points[i].far - points[i].frr;
    if (d_cur <= 0.0) {
      if (d_prev == d_cur) return points[i].far;
      double t = d_prev / (d_prev - d_cur);
      return points[i - 1].far + t * (points[i].far - points[i - 1].far);
    }
  }
  return points.back().far;  // unreachable: last point has d = -1
}

double MinDcf(const ScoreSet &set, double p_target, double c_miss,
              double c_fa) {
  if (p_target <= 0.0 || p_target >= 1.0)
    throw std::invalid_argument("MinDcf: p_target must be in (0,1)");
  if (c_miss <= 0.0 || c_fa <= 0.0)
    throw std::invalid_argument("MinDcf: costs must be positive");
  std::vector<SweepPoint> points = Sweep(set);
  double best = std::numeric_limits<double>::infinity();
  for (const SweepPoint &p : points) {
    double cost = c_miss * p_target * p.frr + c_fa * (1.0 - p_target) * p.far;
    best = std::min(best, cost);
  }
  return best / std::min(c_miss * p_target, c_fa * (1.0 - p_target));
}

std::vector<DETPoint> DetCurve(const ScoreSet &set) {
  std::vector<SweepPoint> points = Sweep(set);
  std::vector<DETPoint> out;
  out.reserve(points.size());
  for (const SweepPoint &p : points)
    out.push_back({p.threshold, p.far, p.frr});
  return out;
}

std::vector<Trial> ReadTrialList(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ReadTrialList: cannot open " + path);
  std::vector<Trial> trials;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Trial t;
    std::string tag;
    if (!(ss >> t.enroll_id >> t.test_id >> tag))
      throw std::runtime_error("ReadTrialList: malformed line: " + line);
    if (tag == "target") t.is_target = true;
    else if (tag == "nontarget") t.is_target = false;
    else throw std::runtime_error("ReadTrialList: unknown label: " + tag);
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteTrialList(const std::string &path, const std::vector<Trial> &trials) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("WriteTrialList: cannot open " + path);
  for (const Trial &t : trials)
    out << t.enroll_id << ' ' << t.test_id << ' '
        << (t.is_target ? "target" : "nontarget") << '\n';
}

void WriteScores(const std::string &path, const std::vector<Trial> &trials,
                 const std::vector<double> &scores) {
  if (trials.size() != scores.size())
    throw std::invalid_argument("WriteScores: size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("WriteScores: cannot open " + path);
  char buf[64];
  for (size_t i = 0; i < trials.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
    out << trials[i].enroll_id << ' ' << trials[i].test_id << ' ' << buf
        << '\n';
  }
}

}  // namespace uase

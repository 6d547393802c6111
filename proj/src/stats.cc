// uase/stats.cc
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

#include "uase/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uase {

std::vector<double> Softmax(const std::vector<double> &v) {
  if (v.empty()) throw std::invalid_argument("Softmax: empty input");
  double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double &p : out) p /= sum;
  return out;
}

double LogSumExp(const std::vector<double> &v) {
  if (v.empty()) throw std::invalid_argument("LogSumExp: empty input");
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

double Mean(const std::vector<double> &x) {
  if (x.empty()) throw std::invalid_argument("Mean: empty input");
  return std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

double Variance(const std::vector<double> &x) {
  double m = Mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / x.size();
}

std::vector<double> FractionalRanks(const std::vector<double> &x) {
  size_t n = x.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    // average of 1-based ranks i+1..j+1
    double r = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

static double PearsonRaw(const std::vector<double> &x,
                         const std::vector<double> &y) {
  double mx = Mean(x), my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("Correlation: zero variance input");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double Correlation(const std::vector<double> &x, const std::vector<double> &y,
                   CorrelationKind kind) {
  if (x.size() != y.size())
    throw std::invalid_argument("Correlation: length mismatch");
  if (x.size() < 2)
    throw std::invalid_argument("Correlation: need at least 2 points");
  if (kind == CorrelationKind::kPearson) return PearsonRaw(x, y);
  return PearsonRaw(FractionalRanks(x), FractionalRanks(y));
}

}  // namespace uase

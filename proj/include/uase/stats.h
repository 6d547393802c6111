// uase/stats.h
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

#ifndef UASE_STATS_H_
#define UASE_STATS_H_

#include <vector>

namespace uase {

enum class CorrelationKind { kPearson, kSpearman };

/// Stable softmax (max-subtracted).  Throws on an empty input.
std::vector<double> Softmax(const std::vector<double> &v);

/// log sum_i exp(v_i), max-shifted.  Throws on an empty input.
double LogSumExp(const std::vector<double> &v);

/// Pearson or Spearman correlation in [-1, 1].  Spearman uses fractional
/// ranks with average ties.  Throws on length mismatch, length < 2, or zero
/// variance.
double Correlation(const std::vector<double> &x, const std::vector<double> &y,
                   CorrelationKind kind);

/// Fractional ranks (1-based), ties resolved by average rank.
std::vector<double> FractionalRanks(const std::vector<double> &x);

double Mean(const std::vector<double> &x);
double Variance(const std::vector<double> &x);  // population variance

}  // namespace uase

#endif  // UASE_STATS_H_

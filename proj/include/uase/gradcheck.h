// uase/gradcheck.h
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

#ifndef UASE_GRADCHECK_H_
#define UASE_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

namespace uase {

struct GradCheckReport {
  double max_abs_diff = 0.0;
  double max_rel_diff = 0.0;
  int probe_count = 0;
};

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
/// Throws (naming the coordinate) if f returns a non-finite value.
std::vector<double> FiniteDifferenceGradient(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &x, double h = 1e-5);

/// Compares an analytic gradient to central differences of f at x.
/// Relative difference per coordinate is |a - fd| / max(1e-3, |a|, |fd|).
GradCheckReport CompareGradient(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &x, const std::vector<double> &analytic,
    double h = 1e-5);

}  // namespace uase

#endif  // UASE_GRADCHECK_H_

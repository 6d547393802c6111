// uase/gradcheck.cc
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

#include "uase/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uase {

std::vector<double> FiniteDifferenceGradient(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &x, double h) {
  if (h <= 0.0) throw std::invalid_argument("FiniteDifferenceGradient: h <= 0");
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    double fp = f(probe);
    probe[i] = x[i] - h;
    double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error(
          "FiniteDifferenceGradient: non-finite f at coordinate " +
          std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

GradCheckReport CompareGradient(
    const std::function<double(const std::vector<double> &)> &f,
    const std::vector<double> &x, const std::vector<double> &analytic,
    double h) {
  if (analytic.size() != x.size())
    throw std::invalid_argument("CompareGradient: gradient size mismatch");
  std::vector<double> fd = FiniteDifferenceGradient(f, x, h);
  GradCheckReport report;
  report.probe_count = static_cast<int>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double abs_diff = std::fabs(analytic[i] - fd[i]);
    double scale = std::max({1e-3, std::fabs(analytic[i]), std::fabs(fd[i])});
    report.max_abs_diff = std::max(report.max_abs_diff, abs_diff);
    report.max_rel_diff = std::max(report.max_rel_diff, abs_diff / scale);
  }
  return report;
}

}  // namespace uase

// tests/test_numkit.cc
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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "uase/gradcheck.h"
#include "uase/matrix.h"
#include "uase/random.h"
#include "uase/stats.h"

using namespace uase;

TEST_CASE("softmax of equal logits is uniform") {
  std::vector<double> p = Softmax({0.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Large equal logits must not overflow.
  p = Softmax({1000.0, 1000.0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softmax oracle values") {
  std::vector<double> p = Softmax({1.0, 2.0, 3.0});
  CHECK(p[0] == doctest::Approx(0.09003057317038046).epsilon(1e-13));
  CHECK(p[1] == doctest::Approx(0.24472847105479764).epsilon(1e-13));
  CHECK(p[2] == doctest::Approx(0.66524095577482183).epsilon(1e-13));
}

TEST_CASE("softmax properties") {
  RandomStream rng(7);
  for (int probe = 0; probe < 50; ++probe) {
    int n = 1 + static_cast<int>(rng.Below(8));
    std::vector<double> v(n);
    for (double &x : v) x = rng.Uniform(-20.0, 20.0);
    std::vector<double> p = Softmax(v);
    double sum = 0.0;
    for (double x : p) sum += x;
    CHECK(std::abs(sum - 1.0) < 1e-12);

    double c = rng.Uniform(-100.0, 100.0);
    std::vector<double> shifted = v;
    for (double &x : shifted) x += c;
    std::vector<double> q = Softmax(shifted);
    for (int i = 0; i < n; ++i) CHECK(std::abs(p[i] - q[i]) < 1e-12);
  }
  CHECK_THROWS(Softmax({}));
}

TEST_CASE("log_sum_exp values and shift identity") {
  CHECK(LogSumExp({0.0}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(LogSumExp({3.5, 3.5}) ==
        doctest::Approx(3.5 + std::log(2.0)).epsilon(1e-15));
  CHECK(LogSumExp({1.0, 2.0, 3.0}) ==
        doctest::Approx(3.4076059644443803).epsilon(1e-14));
  CHECK_THROWS(LogSumExp({}));

  RandomStream rng(11);
  for (int probe = 0; probe < 50; ++probe) {
    int n = 1 + static_cast<int>(rng.Below(6));
    std::vector<double> v(n);
    for (double &x : v) x = rng.Uniform(-30.0, 30.0);
    double c = rng.Uniform(-500.0, 500.0);
    std::vector<double> shifted = v;
    for (double &x : shifted) x += c;
    CHECK(LogSumExp(shifted) ==
          doctest::Approx(LogSumExp(v) + c).epsilon(1e-11));
  }
}

TEST_CASE("finite differences on simple functions") {
  auto square = [](const std::vector<double> &x) { return x[0] * x[0]; };
  std::vector<double> g = FiniteDifferenceGradient(square, {3.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-8));

  auto constant = [](const std::vector<double> &) { return 4.25; };
  g = FiniteDifferenceGradient(constant, {1.0, -2.0, 0.5});
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("finite differences report the offending coordinate") {
  auto bad = [](const std::vector<double> &x) {
    return x[1] > 1.0 ? std::nan("") : x[1];
  };
  CHECK_THROWS_WITH_AS(FiniteDifferenceGradient(bad, {0.0, 1.0}, 1e-1),
                       doctest::Contains("coordinate 1"), std::runtime_error);
}

TEST_CASE("gradcheck accepts a correct gradient and rejects a wrong one") {
  auto f = [](const std::vector<double> &x) {
    return x[0] * x[0] * x[1] + std::sin(x[1]);
  };
  std::vector<double> x = {1.3, -0.4};
  std::vector<double> analytic = {2.0 * x[0] * x[1],
                                  x[0] * x[0] + std::cos(x[1])};
  GradCheckReport report = CompareGradient(f, x, analytic);
  CHECK(report.max_rel_diff < 1e-6);
  CHECK(report.probe_count == 2);

  analytic[0] += 0.1;
  report = CompareGradient(f, x, analytic);
  CHECK(report.max_rel_diff > 1e-2);
}

TEST_CASE("correlation endpoints") {
  std::vector<double> x = {1.0, 2.0, 5.0, 3.0};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(Correlation(x, x, CorrelationKind::kPearson) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Correlation(x, neg, CorrelationKind::kPearson) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(Correlation(x, x, CorrelationKind::kSpearman) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation hand oracles") {
  // Ranks (1,2,3) vs (2,1,3): covariance 1/3 over variance 2/3.
  CHECK(Correlation({1.0, 2.0, 3.0}, {2.0, 1.0, 3.0},
                    CorrelationKind::kSpearman) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Tie in x: ranks (1.5, 1.5, 3) vs (1, 2, 3).
  CHECK(Correlation({1.0, 1.0, 2.0}, {5.0, 6.0, 7.0},
                    CorrelationKind::kSpearman) ==
        doctest::Approx(0.8660254037844386).epsilon(1e-12));
}

TEST_CASE("correlation rejects degenerate input") {
  CHECK_THROWS(Correlation({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0},
                           CorrelationKind::kPearson));
  CHECK_THROWS(Correlation({1.0}, {1.0}, CorrelationKind::kPearson));
  CHECK_THROWS(Correlation({1.0, 2.0}, {1.0, 2.0, 3.0},
                           CorrelationKind::kPearson));
}

TEST_CASE("spearman equals pearson on fractional ranks") {
  RandomStream rng(23);
  for (int probe = 0; probe < 20; ++probe) {
    int n = 4 + static_cast<int>(rng.Below(10));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.Below(5));  // force ties
      y[i] = rng.Uniform(-1.0, 1.0);
    }
    if (Variance(x) == 0.0) continue;
    double direct = Correlation(x, y, CorrelationKind::kSpearman);
    double via_ranks = Correlation(FractionalRanks(x), FractionalRanks(y),
                                   CorrelationKind::kPearson);
    CHECK(direct == doctest::Approx(via_ranks).epsilon(1e-12));
  }
}

TEST_CASE("fractional ranks average ties") {
  std::vector<double> r = FractionalRanks({10.0, 20.0, 20.0, 30.0});
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("random streams are reproducible") {
  RandomStream a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(a.NextU64() == b.NextU64());
  RandomStream c(99), d(99);
  for (int i = 0; i < 1000; ++i) CHECK(c.Gaussian() == d.Gaussian());

  RandomStream e(99);
  CHECK(e.Fork(1).NextU64() == RandomStream(99).Fork(1).NextU64());
  CHECK(e.Fork(1).NextU64() != e.Fork(2).NextU64());
  CHECK(RandomStream(1).NextU64() != RandomStream(2).NextU64());
}

TEST_CASE("matrix products agree with transpose identities") {
  RandomStream rng(5);
  Matrix a = rng.GaussianMatrix(3, 4);
  Matrix b = rng.GaussianMatrix(5, 4);
  Matrix nt = a.MatMulNT(b);
  Matrix ref = a.MatMul(b.Transpose());
  CHECK(nt == ref);

  Matrix c = rng.GaussianMatrix(3, 6);
  Matrix tn = a.MatMulTN(c);
  Matrix ref2 = a.Transpose().MatMul(c);
  CHECK(tn == ref2);

  CHECK_THROWS(a.MatMul(c));
}

TEST_CASE("matrix multiply oracle") {
  Matrix a(2, 2, {1.0, 2.0, 3.0, 4.0});
  Matrix b(2, 2, {5.0, 6.0, 7.0, 8.0});
  Matrix ab = a.MatMul(b);
  CHECK(ab == Matrix(2, 2, {19.0, 22.0, 43.0, 50.0}));
}

TEST_CASE("mean and population variance") {
  CHECK(Mean({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5));
  CHECK(Variance({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(1.25));
}

// uase/random.h
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

#ifndef UASE_RANDOM_H_
#define UASE_RANDOM_H_

#include <cmath>
#include <cstdint>

#include "uase/matrix.h"

namespace uase {

/// Seeded random stream with a bit-exact cross-platform sequence.
///
/// The generator is xoshiro256** seeded through splitmix64; both are fully
/// specified integer recurrences, so identical seeds give identical draw
/// sequences on every platform.  Gaussians use the polar Box-Muller transform
/// on this stream (one cached spare per pair).
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : seed_(seed) {
    uint64_t x = seed;
    for (int i = 0; i < 4; ++i) s_[i] = SplitMix64(&x);
    has_spare_ = false;
    spare_ = 0.0;
  }

  uint64_t Seed() const { return seed_; }

  uint64_t NextU64() {
    uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double Uniform() { return (NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Integer in [0, n).
  uint64_t Below(uint64_t n) { return NextU64() % n; }

  double Gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  Matrix GaussianMatrix(int rows, int cols, double stddev = 1.0) {
    Matrix m(rows, cols);
    for (size_t i = 0; i < m.Size(); ++i) m[i] = stddev * Gaussian();
    return m;
  }

  Matrix UniformMatrix(int rows, int cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (size_t i = 0; i < m.Size(); ++i) m[i] = Uniform(lo, hi);
    return m;
  }

  /// Independent substream; distinct keys give decorrelated streams and the
  /// result depends only on (seed, key).
  RandomStream Fork(uint64_t key) const {
    uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL + key * 0xbf58476d1ce4e5b9ULL);
    return RandomStream(SplitMix64(&x));
  }

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t SplitMix64(uint64_t *state) {
    uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t s_[4];
  bool has_spare_;
  double spare_;
};

}  // namespace uase

#endif  // UASE_RANDOM_H_

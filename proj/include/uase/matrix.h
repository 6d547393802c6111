// uase/matrix.h
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

#ifndef UASE_MATRIX_H_
#define UASE_MATRIX_H_

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace uase {

/// Dense row-major matrix of doubles.  Row vectors are 1 x n matrices; all
/// numerics in this project run in double precision.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * cols, fill) {
    assert(rows >= 0 && cols >= 0);
  }
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<size_t>(rows) * cols)
      throw std::invalid_argument("Matrix: data size does not match shape");
  }

  static Matrix RowVector(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Matrix(1, n, std::move(v));
  }
  static Matrix Identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int Rows() const { return rows_; }
  int Cols() const { return cols_; }
  size_t Size() const { return data_.size(); }
  bool Empty() const { return data_.empty(); }

  double &operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::vector<double> &Data() { return data_; }
  const std::vector<double> &Data() const { return data_; }

  bool SameShape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool AllFinite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Matrix Transpose() const {
    Matrix out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  /// this * other
  Matrix MatMul(const Matrix &other) const {
    if (cols_ != other.rows_)
      throw std::invalid_argument("MatMul: inner dimensions disagree");
    Matrix out(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int k = 0; k < cols_; ++k) {
        double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (int j = 0; j < other.cols_; ++j)
          out(i, j) += a * other(k, j);
      }
    }
    return out;
  }

  /// this * other^T
  Matrix MatMulNT(const Matrix &other) const {
    if (cols_ != other.cols_)
      throw std::invalid_argument("MatMulNT: inner dimensions disagree");
    Matrix out(rows_, other.rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < other.rows_; ++j) {
        double acc = 0.0;
        for (int k = 0; k < cols_; ++k) acc += (*this)(i, k) * other(j, k);
        out(i, j) = acc;
      }
    return out;
  }

  /// this^T * other
  Matrix MatMulTN(const Matrix &other) const {
    if (rows_ != other.rows_)
      throw std::invalid_argument("MatMulTN: inner dimensions disagree");
    Matrix out(cols_, other.cols_);
    for (int k = 0; k < rows_; ++k)
      for (int i = 0; i < cols_; ++i) {
        double a = (*this)(k, i);
        if (a == 0.0) continue;
        for (int j = 0; j < other.cols_; ++j)
          out(i, j) += a * other(k, j);
      }
    return out;
  }

  void AddScaled(const Matrix &other, double alpha) {
    assert(SameShape(other));
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * other.data_[i];
  }

  void Scale(double alpha) {
    for (double &v : data_) v *= alpha;
  }

  void SetZero() {
    for (double &v : data_) v = 0.0;
  }

  Matrix Row(int r) const {
    Matrix out(1, cols_);
    for (int c = 0; c < cols_; ++c) out(0, c) = (*this)(r, c);
    return out;
  }

  friend bool operator==(const Matrix &a, const Matrix &b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

inline double Dot(const Matrix &a, const Matrix &b) {
  assert(a.Size() == b.Size());
  double acc = 0.0;
  for (size_t i = 0; i < a.Size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double Norm(const Matrix &a) { return std::sqrt(Dot(a, a)); }

}  // namespace uase

#endif  // UASE_MATRIX_H_

// include/mlctc/numerics.h

// Copyright 2026  mlctc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MLCTC_NUMERICS_H_
#define MLCTC_NUMERICS_H_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace mlctc {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Dense row-major matrix of doubles. Column vectors are n x 1 matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Builds a matrix from nested rows; every row must have the same length.
  static Matrix FromRows(const std::vector<std::vector<double>>& rows);
  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void Fill(double v);
  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool AllFinite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Throw ShapeError on dimension mismatch.
Matrix MatMul(const Matrix& a, const Matrix& b);
Matrix Add(const Matrix& a, const Matrix& b);
Matrix Hadamard(const Matrix& a, const Matrix& b);
Matrix Transpose(const Matrix& a);

/// a += scale * b
void AddScaledInPlace(Matrix& a, const Matrix& b, double scale = 1.0);

/// ln(sum(exp(v))). Throws DomainError on empty input.
double LogSumExp(std::span<const double> values);

/// Two-term log-add used by the lattice recursions.
inline double LogAdd(double a, double b);

/// Throws DomainError on any non-finite entry.
std::vector<double> Softmax(std::span<const double> logits);
std::vector<double> LogSoftmax(std::span<const double> logits);
/// Row-wise log-softmax of a T x V logit matrix.
Matrix LogSoftmaxRows(const Matrix& logits);

double Sigmoid(double x);
double Tanh(double x);

/// xoshiro256** seeded through splitmix64. The output sequence depends only
/// on the seed, never on platform or standard-library version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t NextU64();

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  /// Box-Muller; consumes two uniforms per call.
  double Gaussian(double mean, double stddev);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t Below(std::size_t n);
  /// Throws DomainError unless keep_prob is in [0, 1].
  std::vector<double> BernoulliMask(std::size_t length, double keep_prob);
  /// Independent child stream; advances this generator by one draw.
  Rng Split();

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = Below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

// Free-function spellings of the draws.
inline double RngUniform(Rng& rng) { return rng.Uniform(); }
inline double RngGaussian(Rng& rng, double mean, double stddev) {
  return rng.Gaussian(mean, stddev);
}
inline std::vector<double> RngBernoulliMask(Rng& rng, std::size_t length,
                                            double keep_prob) {
  return rng.BernoulliMask(length, keep_prob);
}

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace mlctc

#endif  // MLCTC_NUMERICS_H_

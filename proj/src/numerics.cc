// src/numerics.cc

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

#include "mlctc/numerics.h"

#include <algorithm>
#include <numbers>
#include <string>

#include "mlctc/errors.h"

namespace mlctc {

namespace {

std::string ShapeString(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::uint64_t SplitMix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t Rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
}

Matrix Matrix::FromRows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ShapeError("ragged rows in FromRows");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::Fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul " + ShapeString(a) + " by " + ShapeString(b));
  Matrix out(a.rows(), b.cols());
  // i-k-j order; each output entry accumulates over k in increasing order.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix Add(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b))
    throw ShapeError("add " + ShapeString(a) + " and " + ShapeString(b));
  Matrix out = a;
  AddScaledInPlace(out, b);
  return out;
}

Matrix Hadamard(const Matrix& a, const Matrix& b) {
  if (!a.SameShape(b))
    throw ShapeError("hadamard " + ShapeString(a) + " and " + ShapeString(b));
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return out;
}

Matrix Transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void AddScaledInPlace(Matrix& a, const Matrix& b, double scale) {
  if (!a.SameShape(b))
    throw ShapeError("add " + ShapeString(a) + " and " + ShapeString(b));
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) av[i] += scale * bv[i];
}

double LogSumExp(std::span<const double> values) {
  if (values.empty()) throw DomainError("log_sum_exp of an empty array");
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kLogZero) return kLogZero;
  if (std::isinf(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::vector<double> LogSoftmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  for (double v : logits)
    if (!std::isfinite(v)) throw DomainError("softmax of a non-finite logit");
  const double lse = LogSumExp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> Softmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  for (double v : logits)
    if (!std::isfinite(v)) throw DomainError("softmax of a non-finite logit");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

Matrix LogSoftmaxRows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) {
    auto row = LogSoftmax(logits.row(t));
    std::copy(row.begin(), row.end(), out.row(t).begin());
  }
  return out;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double Tanh(double x) { return std::tanh(x); }

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = SplitMix64(x);
}

std::uint64_t Rng::NextU64() {
  const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Gaussian(double mean, double stddev) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

std::size_t Rng::Below(std::size_t n) {
  if (n == 0) throw DomainError("Rng::Below(0)");
  // Rejection sampling removes modulo bias.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<double> Rng::BernoulliMask(std::size_t length, double keep_prob) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0))
    throw DomainError("keep probability " + std::to_string(keep_prob) +
                      " outside [0, 1]");
  std::vector<double> mask(length);
  for (double& m : mask) m = Uniform() < keep_prob ? 1.0 : 0.0;
  return mask;
}

Rng Rng::Split() { return Rng(NextU64()); }

}  // namespace mlctc

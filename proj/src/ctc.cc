// src/ctc.cc

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

#include "mlctc/ctc.h"

#include <string>
#include <vector>

#include "mlctc/errors.h"

namespace mlctc {

namespace {

// Skip transition s-2 -> s is allowed iff z_s is a label that differs from
// z_{s-2}.
inline bool CanSkip(const LabelSequence& z, std::size_t s) {
  return s >= 2 && z[s] != kBlank && z[s] != z[s - 2];
}

// alpha(t, s): log mass of all path prefixes ending in state s at frame t,
// emissions up to and including t.
Matrix ForwardLattice(const Matrix& lp, const LabelSequence& z) {
  const std::size_t T = lp.rows();
  const std::size_t S = z.size();
  Matrix alpha(T, S, kLogZero);
  alpha(0, 0) = lp(0, z[0]);
  if (S > 1) alpha(0, 1) = lp(0, z[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = LogAdd(a, alpha(t - 1, s - 1));
      if (CanSkip(z, s)) a = LogAdd(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kLogZero ? kLogZero : a + lp(t, z[s]);
    }
  }
  return alpha;
}

// beta(t, s): log mass of all path suffixes leaving state s at frame t,
// emissions strictly after t.
Matrix BackwardLattice(const Matrix& lp, const LabelSequence& z) {
  const std::size_t T = lp.rows();
  const std::size_t S = z.size();
  Matrix beta(T, S, kLogZero);
  beta(T - 1, S - 1) = 0.0;
  if (S > 1) beta(T - 1, S - 2) = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s) == kLogZero ? kLogZero
                                            : beta(t + 1, s) + lp(t + 1, z[s]);
      if (s + 1 < S && beta(t + 1, s + 1) != kLogZero)
        b = LogAdd(b, beta(t + 1, s + 1) + lp(t + 1, z[s + 1]));
      if (s + 2 < S && CanSkip(z, s + 2) && beta(t + 1, s + 2) != kLogZero)
        b = LogAdd(b, beta(t + 1, s + 2) + lp(t + 1, z[s + 2]));
      beta(t, s) = b;
    }
  }
  return beta;
}

double FinalLogLikelihood(const Matrix& alpha) {
  const std::size_t T = alpha.rows();
  const std::size_t S = alpha.cols();
  double ll = alpha(T - 1, S - 1);
  if (S > 1) ll = LogAdd(ll, alpha(T - 1, S - 2));
  return ll;
}

}  // namespace

void CtcInstance::Validate() const {
  const std::size_t V = log_probs.cols();
  if (log_probs.rows() == 0 || V == 0) throw DomainError("empty CTC instance");
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    double sum = 0.0;
    for (double v : log_probs.row(t)) sum += std::exp(v);
    if (std::abs(sum - 1.0) > 1e-10)
      throw DomainError("log_probs row " + std::to_string(t) +
                        " does not normalize (sum " + std::to_string(sum) + ")");
  }
  for (int l : labels)
    if (l <= kBlank || static_cast<std::size_t>(l) >= V)
      throw DomainError("label " + std::to_string(l) + " outside [1, " +
                        std::to_string(V) + ")");
}

LabelSequence ExtendedLabels(const LabelSequence& labels) {
  LabelSequence z(2 * labels.size() + 1, kBlank);
  for (std::size_t i = 0; i < labels.size(); ++i) z[2 * i + 1] = labels[i];
  return z;
}

LabelSequence CollapsePath(std::span<const int> path) {
  LabelSequence out;
  int prev = -1;
  for (int p : path) {
    if (p != prev && p != kBlank) out.push_back(p);
    prev = p;
  }
  return out;
}

std::size_t MinFramesRequired(const LabelSequence& labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

double CtcLogLikelihood(const CtcInstance& instance) {
  instance.Validate();
  if (instance.log_probs.rows() < MinFramesRequired(instance.labels)) return kLogZero;
  const LabelSequence z = ExtendedLabels(instance.labels);
  return FinalLogLikelihood(ForwardLattice(instance.log_probs, z));
}

CtcResult CtcGrad(const CtcInstance& instance) {
  instance.Validate();
  const Matrix& lp = instance.log_probs;
  const std::size_t T = lp.rows();
  const std::size_t V = lp.cols();
  if (T < MinFramesRequired(instance.labels))
    throw AlignmentInfeasibleError(
        "label sequence of length " + std::to_string(instance.labels.size()) +
        " needs " + std::to_string(MinFramesRequired(instance.labels)) +
        " frames, have " + std::to_string(T));
  const LabelSequence z = ExtendedLabels(instance.labels);
  const Matrix alpha = ForwardLattice(lp, z);
  const Matrix beta = BackwardLattice(lp, z);
  CtcResult result;
  result.log_likelihood = FinalLogLikelihood(alpha);
  if (result.log_likelihood == kLogZero)
    throw AlignmentInfeasibleError("no CTC path has nonzero probability");

  result.grad_logits = Matrix(T, V);
  std::vector<double> occupancy(V);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kLogZero);
    for (std::size_t s = 0; s < z.size(); ++s) {
      const double ab = alpha(t, s) + beta(t, s);
      if (alpha(t, s) != kLogZero && beta(t, s) != kLogZero)
        occupancy[z[s]] = LogAdd(occupancy[z[s]], ab);
    }
    for (std::size_t k = 0; k < V; ++k) {
      const double posterior = occupancy[k] == kLogZero
                                   ? 0.0
                                   : std::exp(occupancy[k] - result.log_likelihood);
      result.grad_logits(t, k) = std::exp(lp(t, k)) - posterior;
    }
  }
  return result;
}

double CtcBruteForce(const CtcInstance& instance, std::uint64_t max_paths) {
  instance.Validate();
  const std::size_t T = instance.log_probs.rows();
  const std::size_t V = instance.log_probs.cols();
  std::uint64_t total = 1;
  for (std::size_t t = 0; t < T; ++t) {
    if (total > max_paths / V)
      throw InstanceTooLargeError("V^T exceeds the enumeration guard of " +
                                  std::to_string(max_paths));
    total *= V;
  }
  std::vector<int> path(T, 0);
  std::vector<double> survivors;
  for (std::uint64_t n = 0; n < total; ++n) {
    std::uint64_t code = n;
    double logp = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      path[t] = static_cast<int>(code % V);
      code /= V;
      logp += instance.log_probs(t, static_cast<std::size_t>(path[t]));
    }
    if (CollapsePath(path) == instance.labels) survivors.push_back(logp);
  }
  return survivors.empty() ? kLogZero : LogSumExp(survivors);
}

}  // namespace mlctc

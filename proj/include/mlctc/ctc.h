// include/mlctc/ctc.h

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

#ifndef MLCTC_CTC_H_
#define MLCTC_CTC_H_

#include <cstdint>
#include <span>

#include "mlctc/numerics.h"
#include "mlctc/phoneset.h"

namespace mlctc {

inline constexpr int kBlank = 0;

/// Per-frame log posteriors (T x V, blank at column 0) and a blank-free
/// target label sequence.
struct CtcInstance {
  Matrix log_probs;
  LabelSequence labels;

  /// Throws DomainError if a row does not normalize within 1e-10 or a label is
  /// blank or out of range.
  void Validate() const;
};

struct CtcResult {
  double log_likelihood = kLogZero;
  /// d(-ln P) / d(logits), T x V.
  Matrix grad_logits;
};

/// blank, y1, blank, y2, ..., yL, blank
LabelSequence ExtendedLabels(const LabelSequence& labels);

/// Merge repeats, then drop blanks.
LabelSequence CollapsePath(std::span<const int> path);

/// Frames needed to emit labels: L plus one blank between each equal pair.
std::size_t MinFramesRequired(const LabelSequence& labels);

/// ln P(y | X) by the forward recursion in log space. Returns -inf when the
/// labels cannot fit in the available frames.
double CtcLogLikelihood(const CtcInstance& instance);

/// Log-likelihood plus the gradient of -ln P with respect to the logits whose
/// log-softmax is instance.log_probs. Throws AlignmentInfeasibleError when no
/// path exists.
CtcResult CtcGrad(const CtcInstance& instance);

/// Enumerates all V^T paths. Throws InstanceTooLargeError above max_paths.
double CtcBruteForce(const CtcInstance& instance,
                     std::uint64_t max_paths = 10'000'000);

}  // namespace mlctc

#endif  // MLCTC_CTC_H_

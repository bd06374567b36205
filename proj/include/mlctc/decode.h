// include/mlctc/decode.h

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

#ifndef MLCTC_DECODE_H_
#define MLCTC_DECODE_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mlctc/numerics.h"
#include "mlctc/phoneset.h"

namespace mlctc {

struct ErrorCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_length = 0;

  std::size_t distance() const { return substitutions + insertions + deletions; }
  ErrorCounts& operator+=(const ErrorCounts& o);
  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

/// Per-frame argmax (ties go to the lowest index), then collapse.
LabelSequence GreedyDecode(const Matrix& log_probs);

/// Argmax restricted to allowed columns (sorted, must include blank).
LabelSequence GreedyDecodeRestricted(const Matrix& log_probs,
                                     const std::vector<std::size_t>& allowed);

/// Unit-cost Levenshtein. Among minimal alignments the backtrace prefers
/// substitution, then deletion, then insertion.
ErrorCounts EditDistance(const LabelSequence& reference, const LabelSequence& hypothesis);

/// 100 * sum(S + I + D) / sum(reference length). Throws DomainError when the
/// pooled reference length is 0.
double LabelErrorRate(const std::vector<std::pair<LabelSequence, LabelSequence>>& pairs);
double LabelErrorRate(const ErrorCounts& pooled);

struct ScoredUtterance {
  std::string id;
  std::string language_id;
  LabelSequence reference;
  LabelSequence hypothesis;
};

struct ScoreReport {
  std::map<std::string, ErrorCounts> per_language;
  ErrorCounts overall;

  /// Tab-separated: header, one line per language, then "all".
  std::string Format() const;
};

ScoreReport Score(const std::vector<ScoredUtterance>& utterances);

/// `id<TAB>ipa ipa ...` lines.
std::string FormatHypotheses(const UniversalPhoneSet& phones,
                             const std::vector<ScoredUtterance>& utterances);
/// Inverse of FormatHypotheses; returns id -> IPA symbols.
std::map<std::string, std::vector<std::string>> ParseHypotheses(const std::string& text);

}  // namespace mlctc

#endif  // MLCTC_DECODE_H_

// src/decode.cc

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

#include "mlctc/decode.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mlctc/ctc.h"
#include "mlctc/errors.h"

namespace mlctc {

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  reference_length += o.reference_length;
  return *this;
}

LabelSequence GreedyDecode(const Matrix& log_probs) {
  std::vector<int> path(log_probs.rows());
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    auto row = log_probs.row(t);
    path[t] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return CollapsePath(path);
}

LabelSequence GreedyDecodeRestricted(const Matrix& log_probs,
                                     const std::vector<std::size_t>& allowed) {
  if (allowed.empty() || allowed.front() != 0)
    throw DomainError("restricted decoding needs the blank column");
  std::vector<int> path(log_probs.rows());
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    std::size_t best = allowed.front();
    for (std::size_t k : allowed) {
      if (k >= log_probs.cols()) throw ShapeError("allowed column out of range");
      if (log_probs(t, k) > log_probs(t, best)) best = k;
    }
    path[t] = static_cast<int>(best);
  }
  return CollapsePath(path);
}

ErrorCounts EditDistance(const LabelSequence& ref, const LabelSequence& hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<std::size_t>> d(R + 1, std::vector<std::size_t>(H + 1));
  for (std::size_t i = 0; i <= R; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= H; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= R; ++i)
    for (std::size_t j = 1; j <= H; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  ErrorCounts out;
  out.reference_length = R;
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      out.substitutions += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++out.deletions;
      --i;
    } else {
      ++out.insertions;
      --j;
    }
  }
  return out;
}

double LabelErrorRate(const ErrorCounts& pooled) {
  if (pooled.reference_length == 0)
    throw DomainError("label error rate needs a non-empty reference");
  return 100.0 * static_cast<double>(pooled.distance()) /
         static_cast<double>(pooled.reference_length);
}

double LabelErrorRate(const std::vector<std::pair<LabelSequence, LabelSequence>>& pairs) {
  ErrorCounts pooled;
  for (const auto& [ref, hyp] : pairs) pooled += EditDistance(ref, hyp);
  return LabelErrorRate(pooled);
}

ScoreReport Score(const std::vector<ScoredUtterance>& utterances) {
  ScoreReport report;
  for (const auto& u : utterances) {
    const ErrorCounts e = EditDistance(u.reference, u.hypothesis);
    report.per_language[u.language_id] += e;
    report.overall += e;
  }
  return report;
}

std::string ScoreReport::Format() const {
  std::ostringstream out;
  auto line = [&out](const std::string& name, const ErrorCounts& e) {
    char ler[32];
    if (e.reference_length)
      std::snprintf(ler, sizeof ler, "%.4f", LabelErrorRate(e));
    else
      std::snprintf(ler, sizeof ler, "NA");
    out << name << '\t' << e.reference_length << '\t' << e.substitutions << '\t'
        << e.deletions << '\t' << e.insertions << '\t' << ler << '\n';
  };
  out << "language\tref_len\tsub\tdel\tins\tler\n";
  for (const auto& [lang, e] : per_language) line(lang, e);
  line("all", overall);
  return out.str();
}

std::string FormatHypotheses(const UniversalPhoneSet& phones,
                             const std::vector<ScoredUtterance>& utterances) {
  std::ostringstream out;
  for (const auto& u : utterances) {
    out << u.id << '\t';
    const auto ipa = DecodeLabels(phones, u.hypothesis);
    for (std::size_t i = 0; i < ipa.size(); ++i) out << (i ? " " : "") << ipa[i];
    out << '\n';
  }
  return out.str();
}

std::map<std::string, std::vector<std::string>> ParseHypotheses(const std::string& text) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("hypothesis line without id: '" + line + "'");
    std::istringstream words(line.substr(tab + 1));
    std::vector<std::string> ipa;
    for (std::string w; words >> w;) ipa.push_back(w);
    if (!out.emplace(line.substr(0, tab), std::move(ipa)).second)
      throw FormatError("duplicate hypothesis id '" + line.substr(0, tab) + "'");
  }
  return out;
}

}  // namespace mlctc

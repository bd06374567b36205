// tests/decode_test.cc

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

#include <functional>

#include "doctest.h"
#include "mlctc/ctc.h"
#include "mlctc/errors.h"
#include "test_util.h"

using namespace mlctc;

namespace {

Matrix OneHotPath(const std::vector<int>& path, std::size_t V) {
  Matrix lp(path.size(), V, std::log(0.1 / static_cast<double>(V - 1)));
  for (std::size_t t = 0; t < path.size(); ++t) lp(t, path[t]) = std::log(0.9);
  return lp;
}

// Minimal distance over every alignment, by exhaustive recursion.
std::size_t BruteDistance(const LabelSequence& a, std::size_t i, const LabelSequence& b,
                          std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  return std::min({BruteDistance(a, i + 1, b, j + 1) + (a[i] != b[j]),
                   BruteDistance(a, i + 1, b, j) + 1, BruteDistance(a, i, b, j + 1) + 1});
}

}  // namespace

TEST_CASE("greedy decode") {
  CHECK(GreedyDecode(OneHotPath({0, 0, 0}, 4)).empty());
  CHECK(GreedyDecode(OneHotPath({1, 1, 0, 2}, 4)) == LabelSequence{1, 2});
  CHECK(GreedyDecode(OneHotPath({1, 0, 1}, 4)) == LabelSequence{1, 1});
  CHECK(GreedyDecode(Matrix(2, 5, std::log(0.2))).empty());
  Matrix tie(1, 3, std::log(0.25));
  tie(0, 0) = std::log(0.5) - 1.0;
  tie(0, 1) = tie(0, 2) = std::log(0.4);
  CHECK(GreedyDecode(tie) == LabelSequence{1});

  Rng rng(1);
  for (int n = 0; n < 50; ++n) {
    const Matrix lp = LogSoftmaxRows(testing::RandomMatrix(6, 4, rng));
    std::vector<int> path;
    for (std::size_t t = 0; t < 6; ++t) {
      auto row = lp.row(t);
      path.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
    CHECK(GreedyDecode(lp) == CollapsePath(path));
  }
}

TEST_CASE("restricted greedy decode") {
  const Matrix lp = OneHotPath({1, 3, 0, 2}, 4);
  CHECK(GreedyDecodeRestricted(lp, {0, 1, 2, 3}) == GreedyDecode(lp));
  CHECK(GreedyDecodeRestricted(lp, {0, 1, 2}) == LabelSequence{1, 2});
  CHECK_THROWS_AS(GreedyDecodeRestricted(lp, {1, 2}), DomainError);
}

TEST_CASE("edit distance examples") {
  CHECK(EditDistance({1, 2, 3}, {1, 2, 3}) == ErrorCounts{0, 0, 0, 3});
  CHECK(EditDistance({1, 2, 3}, {1, 3}) == ErrorCounts{0, 0, 1, 3});
  CHECK(EditDistance({1, 2}, {2, 1}).distance() == 2);
  CHECK(EditDistance({1, 2}, {2, 1}).distance() == BruteDistance({1, 2}, 0, {2, 1}, 0));
  CHECK(EditDistance({}, {1, 2}) == ErrorCounts{0, 2, 0, 0});
  CHECK(EditDistance({1, 2}, {}) == ErrorCounts{0, 0, 2, 2});
  CHECK(EditDistance({1}, {2}) == ErrorCounts{1, 0, 0, 1});
}

TEST_CASE("edit distance properties") {
  Rng rng(9);
  auto random_seq = [&rng] {
    LabelSequence s(rng.Below(6));
    for (int& v : s) v = 1 + static_cast<int>(rng.Below(3));
    return s;
  };
  for (int n = 0; n < 300; ++n) {
    const auto a = random_seq(), b = random_seq(), c = random_seq();
    const auto ab = EditDistance(a, b).distance();
    CHECK(ab == BruteDistance(a, 0, b, 0));
    CHECK(ab == EditDistance(b, a).distance());
    CHECK(EditDistance(a, c).distance() <= ab + EditDistance(b, c).distance());
    const auto e = EditDistance(a, b);
    CHECK(a.size() - e.deletions + e.insertions == b.size());
  }
}

TEST_CASE("label error rate") {
  CHECK(LabelErrorRate({{{1, 2}, {1, 2}}, {{3}, {3}}}) == 0.0);
  CHECK(LabelErrorRate({{{1, 2, 3, 1}, {1, 2, 1}}}) == doctest::Approx(25.0));
  // Pooled equals the length-weighted mean of per-pair rates.
  const std::vector<std::pair<LabelSequence, LabelSequence>> pairs{
      {{1, 2, 3, 1}, {1, 2, 1}}, {{1, 1}, {2, 2, 2}}, {{3, 2, 1, 2, 3, 1}, {3, 2, 1}}};
  double weighted = 0.0, total = 0.0;
  for (const auto& p : pairs) {
    weighted += LabelErrorRate({p}) * static_cast<double>(p.first.size());
    total += static_cast<double>(p.first.size());
  }
  CHECK(LabelErrorRate(pairs) == doctest::Approx(weighted / total).epsilon(1e-12));
  CHECK_THROWS_AS(LabelErrorRate({{{}, {1}}}), DomainError);
  CHECK_THROWS_AS(LabelErrorRate(std::vector<std::pair<LabelSequence, LabelSequence>>{}),
                  DomainError);
}

TEST_CASE("score report and hypothesis files") {
  const std::vector<LanguagePhoneMap> maps{LanguagePhoneMap::Make("L1", {"p", "a"}),
                                           LanguagePhoneMap::Make("L2", {"p", "o"})};
  const auto u = MergePhoneSets(maps);
  const std::vector<ScoredUtterance> utts{{"u1", "L1", {1, 2}, {1, 2}},
                                          {"u2", "L2", {1, 3, 1, 3}, {1, 3, 1}}};
  const auto report = Score(utts);
  CHECK(LabelErrorRate(report.per_language.at("L1")) == 0.0);
  CHECK(LabelErrorRate(report.per_language.at("L2")) == 25.0);
  CHECK(report.overall.reference_length == 6);
  CHECK(report.Format() ==
        "language\tref_len\tsub\tdel\tins\tler\n"
        "L1\t2\t0\t0\t0\t0.0000\n"
        "L2\t4\t0\t1\t0\t25.0000\n"
        "all\t6\t0\t1\t0\t16.6667\n");
  const std::string text = FormatHypotheses(u, utts);
  CHECK(text == "u1\tp a\nu2\tp o p\n");
  const auto parsed = ParseHypotheses(text);
  CHECK(parsed.at("u2") == std::vector<std::string>{"p", "o", "p"});
  CHECK_THROWS_AS(ParseHypotheses("noid\n"), FormatError);
}

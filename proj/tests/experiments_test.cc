// tests/experiments_test.cc

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

#include "mlctc/experiments.h"

#include "doctest.h"
#include "mlctc/errors.h"

using namespace mlctc;

TEST_CASE("median of odd and even counts") {
  CHECK(Median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(Median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(Median({7.0}) == 7.0);
  CHECK_THROWS_AS(Median({}), DomainError);
}

TEST_CASE("experiment languages give the larger seed strictly more coverage of L5") {
  const auto langs = ExperimentLanguages();
  REQUIRE(langs.size() == 5);
  const UniversalPhoneSet ml3 = MergePhoneSets(std::span(langs).first(3));
  const UniversalPhoneSet ml4 = MergePhoneSets(std::span(langs).first(4));
  const auto c3 = Coverage(ml3, langs[4]);
  const auto c4 = Coverage(ml4, langs[4]);
  CHECK(c4.covered_count > c3.covered_count);
  CHECK(c4.covered_count < langs[4].phones.size());
  // L4 has phones the sources lack, so extension adds rows.
  CHECK_FALSE(Coverage(ml3, langs[3]).unseen.empty());
}

TEST_CASE("synthetic world is deterministic and speaker-disjoint") {
  ExperimentConfig cfg;
  cfg.source_utterances = 40;
  cfg.target_utterances = 40;
  const SyntheticWorld a = BuildWorld(cfg, 9);
  const SyntheticWorld b = BuildWorld(cfg, 9);
  REQUIRE(a.data.size() == 5);
  for (const auto& [lang, d] : a.data) {
    CHECK(d == b.data.at(lang));
    CHECK_NOTHROW(d.CheckSpeakerDisjoint());
    CHECK_FALSE(d.Select(Split::kTest).empty());
  }
  CHECK_FALSE(BuildWorld(cfg, 10).data.at("L1") == a.data.at("L1"));
}

TEST_CASE("reencode maps labels by symbol") {
  ExperimentConfig cfg;
  cfg.source_utterances = 20;
  cfg.target_utterances = 20;
  const SyntheticWorld w = BuildWorld(cfg, 3);
  const auto langs = ExperimentLanguages();
  const UniversalPhoneSet only_l5 = MergePhoneSets(std::span(langs).subspan(4, 1));
  const auto src = w.data.at("L5").Select(Split::kTrain);
  const auto out = Reencode(src, w.all_phones, only_l5);
  REQUIRE(out.size() == src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    REQUIRE(out[i].labels.size() == src[i].labels.size());
    for (std::size_t k = 0; k < src[i].labels.size(); ++k)
      CHECK(only_l5.symbols()[out[i].labels[k]] == w.all_phones.symbols()[src[i].labels[k]]);
  }
  CHECK_THROWS(Reencode(w.data.at("L1").Select(Split::kTrain), w.all_phones, only_l5));
}

TEST_CASE("report format ends with a verdict") {
  ExperimentReport r{"demo", "a\tb\n1\t2\n", {"PASS x <= y"}, true, 0.5};
  const std::string text = r.Format();
  CHECK(text.rfind("# experiment demo\n", 0) == 0);
  CHECK(text.find("a\tb\n1\t2\n# PASS x <= y\n# verdict PASS\n") != std::string::npos);
  r.pass = false;
  CHECK(r.Format().find("# verdict FAIL") != std::string::npos);
}

TEST_CASE("unknown experiment name") {
  ExperimentContext ctx{ExperimentConfig{}};
  CHECK(ExperimentNames().size() == 4);
  CHECK_THROWS_AS(RunExperiment("table9", ctx), DomainError);
}

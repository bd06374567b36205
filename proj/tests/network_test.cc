// tests/network_test.cc

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

#include "mlctc/network.h"

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mlctc/ctc.h"
#include "mlctc/errors.h"
#include "test_util.h"

using namespace mlctc;
using namespace mlctc::testing;

namespace {

UniversalPhoneSet TwoLanguageSet() {
  const std::vector<LanguagePhoneMap> maps{LanguagePhoneMap::Make("L1", {"p", "a"}),
                                           LanguagePhoneMap::Make("L2", {"p", "o"})};
  return MergePhoneSets(maps);
}

Model TinyModel(std::size_t layers, std::size_t H, std::size_t F, bool lhuc,
                std::uint64_t seed, double param_scale = 1.0) {
  ModelConfig cfg{layers, H, F, lhuc};
  Model m = CreateModel(cfg, TwoLanguageSet(), {"L1", "L2"}, seed);
  // Spread parameters beyond the init range so every gate is exercised.
  Rng rng(seed ^ 0xabcdef);
  m.params.ForEachTensor([&](const std::string&, Matrix& t) {
    for (double& v : t.values()) v = param_scale * rng.Uniform(-1.0, 1.0);
  });
  return m;
}

double CtcLoss(const Model& m, const Matrix& x, const LabelSequence& y,
               const DropoutPlan* plan) {
  const auto fwd = NetworkForward(x, m, "L1", plan);
  return -CtcLogLikelihood({fwd.log_probs, y});
}

// Checks every parameter of m against central differences of the CTC loss.
double MaxGradientError(Model m, const Matrix& x, const LabelSequence& y,
                        const DropoutPlan* plan, double h) {
  const auto fwd = NetworkForward(x, m, "L1", plan);
  const auto ctc = CtcGrad({fwd.log_probs, y});
  const Parameters analytic = NetworkBackward(m, fwd.cache, ctc.grad_logits);

  std::vector<const Matrix*> grads;
  analytic.ForEachTensor([&](const std::string&, const Matrix& g) { grads.push_back(&g); });
  double worst = 0.0;
  std::size_t idx = 0;
  std::vector<Matrix*> tensors;
  m.params.ForEachTensor([&](const std::string&, Matrix& t) { tensors.push_back(&t); });
  for (Matrix* t : tensors) {
    const Matrix& g = *grads[idx++];
    for (std::size_t i = 0; i < t->size(); ++i) {
      double& p = t->values()[i];
      const double saved = p;
      p = saved + h;
      const double up = CtcLoss(m, x, y, plan);
      p = saved - h;
      const double down = CtcLoss(m, x, y, plan);
      p = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, RelativeError(g.values()[i], numeric, 1e-6));
    }
  }
  return worst;
}

std::size_t CountParams(const Model& m) {
  std::size_t n = 0;
  m.params.ForEachTensor([&](const std::string&, const Matrix& t) { n += t.size(); });
  return n;
}

}  // namespace

TEST_CASE("cell step with recurrent masks") {
  Rng rng(3);
  LstmCellParams p{RandomMatrix(12, 2, rng), RandomMatrix(12, 3, rng), RandomMatrix(12, 1, rng)};
  const std::vector<double> x{0.3, -0.7};
  const LstmState prev{{0.1, -0.2, 0.4}, {0.5, -1.0, 0.25}};

  const auto plain = LstmCellStep(x, prev, p);
  const std::vector<double> ones(3, 1.0), zeros(3, 0.0);
  const auto masked = LstmCellStep(x, prev, p, ones);
  CHECK(plain.h == masked.h);
  CHECK(plain.c == masked.c);

  LstmStepCache cache;
  const auto blocked = LstmCellStep(x, prev, p, zeros, &cache);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(blocked.c[j] == cache.forget_gate[j] * prev.c[j]);

  const auto zero = LstmCellStep(x, LstmState::Zeros(3), LstmCellParams::Zeros(2, 3));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(zero.h[j] == 0.0);
    CHECK(zero.c[j] == 0.0);
  }
  CHECK_THROWS_AS(LstmCellStep(std::vector<double>{1.0}, prev, p), ShapeError);
  CHECK_THROWS_AS(LstmCellStep(x, prev, p, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("lhuc amplitudes") {
  Rng rng(1);
  const Matrix h = RandomMatrix(4, 2, rng);
  CHECK(ApplyLhuc(h, Matrix(2, 1)) == h);
  Matrix r(2, 1);
  r(0, 0) = std::log(3.0);
  const Matrix scaled = ApplyLhuc(h, r);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(scaled(t, 0) == doctest::Approx(1.5 * h(t, 0)).epsilon(1e-14));
    CHECK(scaled(t, 1) == h(t, 1));
  }
  CHECK(LhucAmplitude(1e9) == doctest::Approx(2.0));
  for (double v = -30.0; v <= 30.0; v += 0.25) {
    CHECK(LhucAmplitude(v) > 0.0);
    CHECK(LhucAmplitude(v) < 2.0);
  }
  CHECK_THROWS_AS(ApplyLhuc(h, Matrix(3, 1)), ShapeError);
}

TEST_CASE("forward shape, determinism and errors") {
  const Model m = TinyModel(2, 4, 6, true, 5, 0.3);
  Rng rng(2);
  const Matrix x = RandomMatrix(5, 6, rng);
  const auto a = NetworkForward(x, m, "L1");
  CHECK(a.logits.rows() == 5);
  CHECK(a.logits.cols() == 4);
  const auto b = NetworkForward(x, m, "L1");
  CHECK(a.logits == b.logits);
  CHECK_THROWS_AS(NetworkForward(x, m, "XX"), LookupError);
  CHECK_THROWS_AS(NetworkForward(Matrix(0, 6), m, "L1"), DomainError);
  CHECK_THROWS_AS(NetworkForward(RandomMatrix(5, 3, rng), m, "L1"), ShapeError);
}

TEST_CASE("zero lhuc vectors reproduce the lhuc-free network") {
  Model with = TinyModel(2, 4, 3, true, 9, 0.5);
  for (auto& [lang, vectors] : with.params.lhuc)
    for (auto& v : vectors) v.Fill(0.0);
  Model without = with;
  without.config.lhuc = false;
  without.params.lhuc.clear();
  Rng rng(4);
  const Matrix x = RandomMatrix(6, 3, rng);
  const auto a = NetworkForward(x, with, "L2");
  const auto b = NetworkForward(x, without, "L2");
  for (std::size_t i = 0; i < a.logits.size(); ++i)
    CHECK(std::abs(a.logits.values()[i] - b.logits.values()[i]) <= 1e-12);
}

TEST_CASE("backward of a zero logit gradient is zero") {
  const Model m = TinyModel(2, 3, 2, true, 1);
  Rng rng(5);
  const Matrix x = RandomMatrix(4, 2, rng);
  const auto fwd = NetworkForward(x, m, "L1");
  const Parameters g = NetworkBackward(m, fwd.cache, Matrix(4, 4));
  g.ForEachTensor([](const std::string&, const Matrix& t) {
    for (double v : t.values()) CHECK(v == 0.0);
  });
  CHECK_THROWS_AS(NetworkBackward(m, fwd.cache, Matrix(3, 4)), ShapeError);
}

TEST_CASE("network gradient matches central differences") {
  // T=3, F=2, H=3, V=4 (two languages share p), one layer.
  Model m = TinyModel(1, 3, 2, true, 11);
  CHECK(CountParams(m) <= 500);
  Rng rng(12);
  const Matrix x = RandomMatrix(3, 2, rng);
  const LabelSequence y{1, 2};
  CHECK(MaxGradientError(m, x, y, nullptr, 1e-4) <= 1e-4);

  DropoutPlan fwd_plan = SampleDropoutPlan(DropoutMode::kForward, 0.3, m.config, rng);
  fwd_plan.masks[0] = {1, 0, 1, 1, 1, 0};
  CHECK(MaxGradientError(m, x, y, &fwd_plan, 1e-4) <= 1e-4);

  DropoutPlan rec_plan = SampleDropoutPlan(DropoutMode::kRecurrent, 0.3, m.config, rng);
  rec_plan.masks[0] = {0, 1, 1, 1, 0, 1};
  CHECK(MaxGradientError(m, x, y, &rec_plan, 1e-4) <= 1e-4);
}

TEST_CASE("two-layer gradient check") {
  Model m = TinyModel(2, 2, 2, true, 21);
  Rng rng(22);
  const Matrix x = RandomMatrix(4, 2, rng);
  DropoutPlan plan = SampleDropoutPlan(DropoutMode::kForward, 0.25, m.config, rng);
  plan.masks = {{1, 1, 0, 1}, {0, 1, 1, 1}};
  CHECK(MaxGradientError(m, x, {3, 1}, nullptr, 1e-4) <= 1e-4);
  CHECK(MaxGradientError(m, x, {3, 1}, &plan, 1e-4) <= 1e-4);
}

TEST_CASE("output rows of absent phones still get the softmax coupling gradient") {
  Model m = TinyModel(1, 3, 2, false, 31, 0.5);
  Rng rng(32);
  const Matrix x = RandomMatrix(3, 2, rng);
  const LabelSequence y{1};  // "o" (index 3) appears nowhere
  const auto fwd = NetworkForward(x, m, "L1");
  const auto g = NetworkBackward(m, fwd.cache, CtcGrad({fwd.log_probs, y}).grad_logits);
  const double h = 1e-5;
  double& w = m.params.output.W(3, 1);
  const double saved = w;
  w = saved + h;
  const double up = CtcLoss(m, x, y, nullptr);
  w = saved - h;
  const double down = CtcLoss(m, x, y, nullptr);
  w = saved;
  const double numeric = (up - down) / (2 * h);
  CHECK(std::abs(numeric) > 1e-6);
  CHECK(RelativeError(g.output.W(3, 1), numeric) <= 1e-6);
}

TEST_CASE("lhuc gradient is routed to the utterance language only") {
  const Model m = TinyModel(1, 3, 2, true, 41, 0.5);
  Rng rng(42);
  const Matrix x = RandomMatrix(3, 2, rng);
  const auto fwd = NetworkForward(x, m, "L2");
  const auto g = NetworkBackward(m, fwd.cache, CtcGrad({fwd.log_probs, {1}}).grad_logits);
  for (double v : g.lhuc.at("L1")[0].values()) CHECK(v == 0.0);
  double norm = 0.0;
  for (double v : g.lhuc.at("L2")[0].values()) norm += std::abs(v);
  CHECK(norm > 0.0);
}

TEST_CASE("dropout plans") {
  ModelConfig cfg{2, 4, 3, false};
  Rng rng(7);
  for (auto mode : {DropoutMode::kForward, DropoutMode::kRecurrent}) {
    const auto plan = SampleDropoutPlan(mode, 0.0, cfg, rng);
    CHECK(plan.masks.size() == 2);
    for (const auto& m : plan.masks)
      for (double v : m) CHECK(v == 1.0);
  }
  CHECK_THROWS_AS(SampleDropoutPlan(DropoutMode::kForward, 1.0, cfg, rng), DomainError);
  CHECK_THROWS_AS(SampleDropoutPlan(DropoutMode::kForward, -0.1, cfg, rng), DomainError);

  const auto batch = SampleMinibatchDropout(0.5, cfg, 2, rng);
  CHECK(batch[0].mode == batch[1].mode);
  CHECK(batch[0].masks != batch[1].masks);

  Rng modes(2024);
  int forward = 0;
  for (int i = 0; i < 10000; ++i) forward += DrawDropoutMode(modes) == DropoutMode::kForward;
  CHECK(forward >= 4700);
  CHECK(forward <= 5300);
}

TEST_CASE("dropout masks are constant over time") {
  const Model m = TinyModel(2, 3, 2, false, 51, 0.5);
  Rng rng(52);
  const Matrix x = RandomMatrix(7, 2, rng);
  const auto ff = SampleDropoutPlan(DropoutMode::kForward, 0.4, m.config, rng);
  const auto res = NetworkForward(x, m, "L1", &ff);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& lc = res.cache.layers[k];
    const Matrix& out = k + 1 < 2 ? res.cache.layers[k + 1].input : res.cache.top;
    for (std::size_t j = 0; j < 6; ++j) {
      const double expect = ff.masks[k][j] / 0.6;
      for (std::size_t t = 0; t < 7; ++t) CHECK(out(t, j) == lc.post_lhuc(t, j) * expect);
    }
  }

  const auto rec = SampleDropoutPlan(DropoutMode::kRecurrent, 0.4, m.config, rng);
  const auto r = NetworkForward(x, m, "L1", &rec);
  const auto& dir = r.cache.layers[0].fwd;
  for (std::size_t t = 1; t < 7; ++t)
    for (std::size_t j = 0; j < 3; ++j) {
      const double write = dir.cell(t, j) - dir.forget_gate(t, j) * dir.cell(t - 1, j);
      const double expect = rec.masks[0][j] * dir.input_gate(t, j) * dir.candidate(t, j);
      CHECK(write == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("backward direction equals forward direction on the reversed sequence") {
  Rng rng(61);
  LstmCellParams p{RandomMatrix(12, 2, rng), RandomMatrix(12, 3, rng), RandomMatrix(12, 1, rng)};
  const Matrix x = RandomMatrix(6, 2, rng);
  Matrix reversed(6, 2);
  for (std::size_t t = 0; t < 6; ++t)
    std::copy(x.row(5 - t).begin(), x.row(5 - t).end(), reversed.row(t).begin());
  const auto back = RunDirection(x, p, true);
  const auto fwd = RunDirection(reversed, p, false);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.hidden(t, j) == fwd.hidden(5 - t, j));
}

TEST_CASE("checkpoint round trip") {
  const Model m = TinyModel(2, 3, 4, true, 71);
  const std::string bytes = SerializeCheckpoint(m);
  const Model back = ParseCheckpoint(bytes);
  CHECK(back == m);
  CHECK(SerializeCheckpoint(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "mlctc_network_test.ckpt";
  SaveCheckpoint(m, path.string());
  CHECK(LoadCheckpoint(path.string()) == m);
  CHECK(LoadCheckpoint(path.string(), m.phones) == m);
  const auto newer = Extend(m.phones, LanguagePhoneMap::Make("L3", {"u"})).set;
  CHECK_THROWS_AS(LoadCheckpoint(path.string(), newer), StaleModelError);
  std::filesystem::remove(path);

  std::string stale = bytes;
  stale.replace(stale.find("phoneset_version 1"), 18, "phoneset_version 2");
  CHECK_THROWS_AS(ParseCheckpoint(stale), StaleModelError);
  CHECK_THROWS_AS(ParseCheckpoint(bytes.substr(0, bytes.size() / 2)), FormatError);
  CHECK_THROWS_AS(ParseCheckpoint("garbage\n"), FormatError);
  CHECK(m.params.TensorNames().front() == "layer0.fwd.W");
  CHECK(m.params.TensorNames().back() == "output.b");
}

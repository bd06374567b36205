// tests/acceptance.cc

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

// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mlctc/adaptation.h"
#include "mlctc/cli.h"
#include "mlctc/ctc.h"
#include "mlctc/decode.h"
#include "mlctc/experiments.h"
#include "mlctc/io.h"
#include "mlctc/network.h"
#include "mlctc/training.h"
#include "test_util.h"

using namespace mlctc;
using namespace mlctc::testing;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-10;
constexpr double kOracleSeconds = 30.0;
constexpr double kCtcGradTol = 1e-6;
constexpr double kCtcGradStep = 1e-5;
constexpr double kNetGradTol = 1e-4;
constexpr double kNetGradStep = 1e-4;
constexpr double kNetGradFloor = 1e-6;
constexpr double kLhucTol = 1e-12;
constexpr double kModeLo = 0.47, kModeHi = 0.53;
constexpr double kTable1Seconds = 600.0;
constexpr double kFig2Seconds = 900.0;
constexpr double kOverfitNats = 0.1;
constexpr int kOverfitSteps = 500;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string extra;  // multi-line report printed under the verdict
};

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

UniversalPhoneSet TinySet() {
  return MergePhoneSets(std::vector<LanguagePhoneMap>{LanguagePhoneMap::Make("L1", {"p", "a"}),
                                                      LanguagePhoneMap::Make("L2", {"p", "o"})});
}

Outcome OracleEquivalence() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  int mismatched_infeasible = 0;
  for (int n = 0; n < 500; ++n) {
    const std::size_t T = 1 + rng.Below(6), V = 2 + rng.Below(3), L = rng.Below(4);
    const CtcInstance inst{LogSoftmaxRows(RandomMatrix(T, V, rng)), RandomLabels(L, V, rng)};
    const double fb = CtcLogLikelihood(inst), bf = CtcBruteForce(inst);
    if (std::isinf(fb) || std::isinf(bf)) {
      mismatched_infeasible += !(std::isinf(fb) && std::isinf(bf));
      continue;
    }
    worst = std::max(worst, std::abs(fb - bf));
  }
  const double secs = Seconds(start);
  return {worst <= kOracleTol && mismatched_infeasible == 0 && secs < kOracleSeconds,
          "500 instances, max |diff| " + Sci(worst) + " (tol " + Sci(kOracleTol) + "), " +
              Sci(secs) + " s (limit " + Sci(kOracleSeconds) + " s)",
          ""};
}

Outcome CtcGradient() {
  Rng rng(2002);
  double worst = 0.0;
  int done = 0;
  while (done < 100) {
    const std::size_t T = 1 + rng.Below(6), V = 2 + rng.Below(4), L = 1 + rng.Below(3);
    const Matrix logits = RandomMatrix(T, V, rng);
    const LabelSequence y = RandomLabels(L, V, rng);
    if (MinFramesRequired(y) > T) continue;
    const CtcResult res = CtcGrad({LogSoftmaxRows(logits), y});
    const Matrix numeric = CentralDifferences(logits, kCtcGradStep, [&](const Matrix& u) {
      return -CtcLogLikelihood({LogSoftmaxRows(u), y});
    });
    for (std::size_t i = 0; i < numeric.size(); ++i)
      worst = std::max(worst, RelativeError(res.grad_logits.values()[i], numeric.values()[i]));
    ++done;
  }
  return {worst <= kCtcGradTol,
          "100 feasible instances, max rel err " + Sci(worst) + " (tol " + Sci(kCtcGradTol) +
              ", h " + Sci(kCtcGradStep) + ")",
          ""};
}

double NetLoss(const Model& m, const Matrix& x, const LabelSequence& y, const DropoutPlan* plan) {
  return -CtcLogLikelihood({NetworkForward(x, m, "L1", plan).log_probs, y});
}

Outcome NetworkGradient() {
  double worst = 0.0;
  std::size_t max_params = 0, checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(3003 + seed);
    const std::size_t H = 2 + rng.Below(3), F = 2 + rng.Below(2), T = 2 + rng.Below(3);
    Model m = CreateModel({1, H, F, true}, TinySet(), {"L1", "L2"}, seed);
    m.params.ForEachTensor([&](const std::string&, Matrix& t) {
      for (double& v : t.values()) v = rng.Uniform(-1.0, 1.0);
    });
    std::size_t n_params = 0;
    m.params.ForEachTensor([&](const std::string&, const Matrix& t) { n_params += t.size(); });
    max_params = std::max(max_params, n_params);
    const Matrix x = RandomMatrix(T, F, rng);
    LabelSequence y = RandomLabels(1 + rng.Below(2), m.num_outputs(), rng);
    if (MinFramesRequired(y) > T) y.resize(1);
    const DropoutMode mode = seed % 2 ? DropoutMode::kRecurrent : DropoutMode::kForward;
    const DropoutPlan plan = SampleDropoutPlan(mode, 0.3, m.config, rng);

    const auto fwd = NetworkForward(x, m, "L1", &plan);
    const auto ctc = CtcGrad({fwd.log_probs, y});
    const Parameters analytic = NetworkBackward(m, fwd.cache, ctc.grad_logits);
    std::vector<const Matrix*> grads;
    analytic.ForEachTensor([&](const std::string&, const Matrix& g) { grads.push_back(&g); });
    std::vector<Matrix*> tensors;
    m.params.ForEachTensor([&](const std::string&, Matrix& t) { tensors.push_back(&t); });
    for (std::size_t k = 0; k < tensors.size(); ++k)
      for (std::size_t i = 0; i < tensors[k]->size(); ++i) {
        double& p = tensors[k]->values()[i];
        const double saved = p;
        p = saved + kNetGradStep;
        const double up = NetLoss(m, x, y, &plan);
        p = saved - kNetGradStep;
        const double down = NetLoss(m, x, y, &plan);
        p = saved;
        worst = std::max(worst, RelativeError(grads[k]->values()[i],
                                              (up - down) / (2 * kNetGradStep), kNetGradFloor));
        ++checked;
      }
  }
  return {worst <= kNetGradTol && max_params <= 500,
          "20 models (both dropout modes, LHUC on), " + std::to_string(checked) +
              " parameters, largest model " + std::to_string(max_params) +
              " params, max rel err " + Sci(worst) + " (tol " + Sci(kNetGradTol) + ", h " +
              Sci(kNetGradStep) + ")",
          ""};
}

Outcome LhucIdentity() {
  Rng rng(4004);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    Model with = CreateModel({2, 3, 4, true}, TinySet(), {"L1"}, 40 + n);
    Model without = with;
    without.config.lhuc = false;
    without.params.lhuc.clear();
    const Matrix x = RandomMatrix(1 + rng.Below(6), 4, rng);
    const Matrix a = NetworkForward(x, with, "L1").logits;
    const Matrix b = NetworkForward(x, without, "L1").logits;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  bool in_range = true;
  double lo = 2.0, hi = 0.0;
  for (int i = 0; i <= 6000; ++i) {
    const double amp = LhucAmplitude(-30.0 + 0.01 * i);
    in_range = in_range && amp > 0.0 && amp < 2.0;
    lo = std::min(lo, amp);
    hi = std::max(hi, amp);
  }
  return {worst <= kLhucTol && in_range,
          "max |r=0 minus no-LHUC| " + Sci(worst) + " (tol " + Sci(kLhucTol) +
              "), amplitude range over r in [-30, 30]: [" + Sci(lo) + ", " + Sci(2.0 - hi) +
              " below 2]",
          ""};
}

Outcome DropoutSemantics() {
  Rng rng(5005);
  // All-zero recurrent mask keeps only the forget path.
  LstmCellParams p{RandomMatrix(12, 2, rng), RandomMatrix(12, 3, rng), RandomMatrix(12, 1, rng)};
  bool exact = true;
  for (int n = 0; n < 50; ++n) {
    const std::vector<double> x{rng.Uniform(-1, 1), rng.Uniform(-1, 1)};
    const LstmState prev{{rng.Uniform(-1, 1), rng.Uniform(-1, 1), rng.Uniform(-1, 1)},
                         {rng.Uniform(-2, 2), rng.Uniform(-2, 2), rng.Uniform(-2, 2)}};
    LstmStepCache cache;
    const auto next = LstmCellStep(x, prev, p, std::vector<double>(3, 0.0), &cache);
    for (std::size_t j = 0; j < 3; ++j) exact = exact && next.c[j] == cache.forget_gate[j] * prev.c[j];
  }
  // Masks are fixed per utterance: a masked run equals a run whose mask is
  // re-applied identically at every frame, checked by splitting the sequence.
  Model m = CreateModel({1, 3, 2, false}, TinySet(), {}, 55);
  bool constant = true;
  for (int n = 0; n < 20; ++n) {
    const DropoutPlan plan = SampleDropoutPlan(
        n % 2 ? DropoutMode::kRecurrent : DropoutMode::kForward, 0.5, m.config, rng);
    const Matrix x = RandomMatrix(5, 2, rng);
    const auto res = NetworkForward(x, m, "L1", &plan);
    const auto& lc = res.cache.layers[0];
    if (plan.mode == DropoutMode::kRecurrent) {
      constant = constant && lc.fwd.recurrent_mask ==
                                 std::vector<double>(plan.masks[0].begin(), plan.masks[0].begin() + 3);
    } else {
      for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t j = 0; j < 6; ++j)
          constant = constant && res.cache.top(t, j) == lc.post_lhuc(t, j) * lc.ff_scale[j];
    }
  }
  Rng draws(5006);
  int forward = 0;
  for (int n = 0; n < 10000; ++n) forward += DrawDropoutMode(draws) == DropoutMode::kForward;
  const double frac = forward / 10000.0;
  return {exact && constant && frac >= kModeLo && frac <= kModeHi,
          std::string("zero mask gives c = f*c_prev exactly: ") + (exact ? "yes" : "no") +
              ", masks time-constant: " + (constant ? "yes" : "no") +
              ", forward-mode fraction " + Sci(frac) + " over 10000 draws (need [" +
              Sci(kModeLo) + ", " + Sci(kModeHi) + "])",
          ""};
}

Outcome AdaptationSurgery() {
  const std::vector<LanguagePhoneMap> maps{LanguagePhoneMap::Make("L1", {"p", "a", "t"}),
                                           LanguagePhoneMap::Make("L2", {"p", "o"})};
  const UniversalPhoneSet set = MergePhoneSets(maps);
  const Model source = CreateModel({2, 4, 3, false}, set, {}, 66);
  const auto ext = Extend(set, LanguagePhoneMap::Make("L3", {"p", "u", "i"}));
  Rng rng(6006);
  const AdaptedModel extended = ExtendOutputLayer(source, set, ext.set, ext.index_map, rng);
  bool bitwise = true;
  for (int n = 0; n < 20; ++n) {
    const Matrix x = RandomMatrix(1 + rng.Below(6), 3, rng);
    const Matrix a = NetworkForward(x, source, "L1").logits;
    const Matrix b = NetworkForward(x, extended.model, "L3").logits;
    for (std::size_t t = 0; t < x.rows(); ++t)
      for (std::size_t i = 0; i < ext.index_map.size(); ++i)
        bitwise = bitwise && a(t, i) == b(t, ext.index_map[i]);
  }

  const UniversalPhoneSet target =
      MergePhoneSets(std::vector<LanguagePhoneMap>{LanguagePhoneMap::Make("L3", {"k", "e"})});
  const AdaptedModel frozen = ReplaceOutputLayer(source, target, true, rng);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.dropout_rate = 0.3;
  cfg.freeze_mask = frozen.plan.freeze_mask;
  TrainState state = TrainState::Init(frozen.model, 7);
  std::vector<Utterance> batch(2);
  for (auto& u : batch) {
    u.language_id = "L3";
    u.features = RandomMatrix(5, 3, rng);
    u.labels = {1, 2};
  }
  for (int step = 0; step < 100; ++step) TrainMinibatch(state, batch, cfg);
  const bool hidden_same = state.model.params.layers == source.params.layers;
  const bool output_moved = !(state.model.params.output == frozen.model.params.output);
  return {bitwise && hidden_same && output_moved,
          std::string("extend: old-symbol logits bitwise equal: ") + (bitwise ? "yes" : "no") +
              "; freeze: hidden tensors bitwise unchanged after 100 steps: " +
              (hidden_same ? "yes" : "no") + ", output layer trained: " +
              (output_moved ? "yes" : "no"),
          ""};
}

Outcome FromReport(const ExperimentReport& r, double limit_seconds) {
  const bool in_time = limit_seconds <= 0 || r.seconds < limit_seconds;
  std::string detail = "median over 3 seeds, " + Sci(r.seconds) + " s";
  if (limit_seconds > 0) detail += " (limit " + Sci(limit_seconds) + " s)";
  std::string extra = r.table;
  for (const auto& c : r.checks) extra += c + "\n";
  return {r.pass && in_time, detail, extra};
}

Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() / "mlctc_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto path = [&](const std::string& f) { return (dir / f).string(); };
  WriteFile(path("a.phn"), "lang A p t a i\n");
  WriteFile(path("b.phn"), "lang B p o k e\n");
  std::ostringstream sink;
  int code = RunCli({"data-gen", "--maps", path("a.phn"), path("b.phn"), "--out", path("data"),
                     "--seed", "11", "--utterances", "60", "--speakers", "6"},
                    sink, sink);
  auto train = [&](const std::string& out, const std::string& threads) {
    return RunCli({"train", "--data", path("data"), "--out", path(out), "--seed", "5",
                   "--layers", "2", "--hidden", "6", "--lr", "0.01", "--batch-size", "4",
                   "--max-epochs", "4", "--dropout", "0.2", "--lhuc", "--threads", threads},
                  sink, sink);
  };
  code |= train("t1", "1");
  code |= train("t2", "1");
  code |= train("t4", "4");
  bool same = code == 0;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(path("t1"))) {
    const std::string name = entry.path().filename().string();
    if (name == "repro.json") continue;  // records the output path
    const std::string bytes = ReadFile(entry.path().string());
    same = same && bytes == ReadFile(path("t2/" + name)) && bytes == ReadFile(path("t4/" + name));
    ++files;
  }
  fs::remove_all(dir);
  return {same && files >= 2,
          "train run 3 times (threads 1, 1, 4): " + std::to_string(files) +
              " checkpoint/log files " + (same ? "bitwise identical" : "DIFFER"),
          ""};
}

Outcome Overfit() {
  Rng rng(12012);
  std::vector<Utterance> data(3);
  const std::vector<LabelSequence> labels{{1, 2, 3}, {3, 1}, {2, 2}};
  for (std::size_t i = 0; i < 3; ++i) {
    data[i].language_id = "L1";
    data[i].features = RandomMatrix(6, 4, rng, -1.0, 1.0);
    data[i].labels = labels[i];
  }
  TrainState s = TrainState::Init(CreateModel({1, 8, 4, false}, TinySet(), {}, 7), 1);
  TrainConfig c;
  c.learning_rate = 0.05;
  int steps = 0;
  double loss = 1e9;
  for (; steps < kOverfitSteps && loss >= kOverfitNats; ++steps)
    loss = TrainMinibatch(s, data, c).mean_loss;
  loss = EvaluateMeanLoss(s.model, data).mean_loss;
  std::vector<std::pair<LabelSequence, LabelSequence>> pairs;
  for (const auto& u : data)
    pairs.emplace_back(u.labels, GreedyDecode(NetworkForward(u.features, s.model, "L1").log_probs));
  const double ler = LabelErrorRate(pairs);
  return {loss < kOverfitNats && ler == 0.0,
          "1 layer H=8, " + std::to_string(steps) + " steps, mean loss " + Sci(loss) +
              " nats (need < " + Sci(kOverfitNats) + "), LER " + Sci(ler) + "%",
          ""};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; default runs all.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0, ran = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    if (!only.empty() && !only.count(id)) return;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), ""};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " | "
              << o.detail << "\n";
    std::istringstream extra(o.extra);
    for (std::string line; std::getline(extra, line);) std::cout << "      " << line << "\n";
    std::cout << std::flush;
  };

  report(1, "CTC oracle equivalence", OracleEquivalence);
  report(2, "CTC gradient", CtcGradient);
  report(3, "full-network gradient", NetworkGradient);
  report(4, "LHUC identity", LhucIdentity);
  report(5, "dropout semantics", DropoutSemantics);
  report(6, "adaptation surgery", AdaptationSurgery);

  ExperimentConfig cfg;
  cfg.fig2_fractions = {0.01, 0.05, 0.25};
  // Each timed experiment starts from an empty context so its runtime
  // includes training its own seed models.
  report(7, "multilingual+LHUC trend", [&] {
    ExperimentContext ctx(cfg);
    return FromReport(RunTable1Trend(ctx), kTable1Seconds);
  });
  std::optional<ExperimentContext> shared_storage;
  auto shared = [&]() -> ExperimentContext& {
    if (!shared_storage) shared_storage.emplace(cfg);
    return *shared_storage;
  };
  report(8, "adaptation strategies vs data", [&] {
    return FromReport(RunFig2Curve(shared()), kFig2Seconds);
  });
  report(9, "phone coverage of the seed model", [&] {
    return FromReport(RunTable2Coverage(shared()), 0);
  });
  report(10, "dropout during adaptation", [&] {
    return FromReport(RunTable3Dropout(shared()), 0);
  });
  report(11, "determinism", Determinism);
  report(12, "overfit smoke test", Overfit);

  std::cout << (failures ? "FAILED " : "ALL PASSED ") << ran - failures << "/" << ran << "\n";
  return failures ? 1 : 0;
}

// src/experiments.cc

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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mlctc/adaptation.h"
#include "mlctc/errors.h"

namespace mlctc {

namespace {

const std::vector<std::string> kSources{"L1", "L2", "L3"};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string FractionKey(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", f);
  return buf;
}

std::uint64_t Mix(std::uint64_t seed, std::uint64_t salt) {
  return seed * 0x9e3779b97f4a7c15ULL + salt;
}

std::vector<Utterance> Concat(const std::vector<std::vector<Utterance>>& parts) {
  std::vector<Utterance> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string Check(bool ok, const std::string& text) {
  return std::string(ok ? "PASS " : "FAIL ") + text;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  source_training.learning_rate = 0.01;
  source_training.momentum = 0.9;
  source_training.batch_size = 8;
  source_training.max_epochs = 40;
  source_training.patience = 6;
  target_training = source_training;
  target_training.max_epochs = 60;
}

std::vector<LanguagePhoneMap> ExperimentLanguages() {
  return {LanguagePhoneMap::Make("L1", {"p", "t", "k", "a", "i", "u", "m", "s"}),
          LanguagePhoneMap::Make("L2", {"p", "t", "b", "a", "e", "o", "n", "s", "l"}),
          LanguagePhoneMap::Make("L3", {"k", "g", "a", "i", "o", "m", "n", "r"}),
          LanguagePhoneMap::Make("L4", {"p", "t", "k", "a", "e", "u", "\xCA\x83", "\xC5\x8B"}),
          LanguagePhoneMap::Make("L5", {"t", "a", "i", "o", "\xCA\x83", "\xC5\x8B", "f"})};
}

SyntheticWorld BuildWorld(const ExperimentConfig& config, std::uint64_t seed) {
  SyntheticWorld w;
  w.languages = ExperimentLanguages();
  w.all_phones = MergePhoneSets(w.languages);
  Rng rng(Mix(seed, 1));
  const PhonePrototypeBank bank = BuildPrototypeBank(w.all_phones, config.feature_dim, rng);
  for (const auto& map : w.languages) {
    SyntheticLanguageSpec spec;
    spec.phones = map;
    const bool source =
        std::find(kSources.begin(), kSources.end(), map.language_id) != kSources.end();
    spec.utterance_count = source ? config.source_utterances : config.target_utterances;
    spec.accent_offset_scale = config.accent_offset_scale;
    spec.speaker_offset_scale = config.speaker_offset_scale;
    spec.noise_std = config.noise_std;
    Rng lang_rng = rng.Split();
    w.data[map.language_id] =
        NormalizePerSpeaker(GenerateLanguage(spec, bank, w.all_phones, lang_rng));
  }
  return w;
}

std::vector<Utterance> Reencode(const std::vector<Utterance>& utterances,
                                const UniversalPhoneSet& from, const UniversalPhoneSet& to) {
  std::vector<Utterance> out = utterances;
  for (auto& u : out) u.labels = EncodeLabels(to, u.language_id, DecodeLabels(from, u.labels));
  return out;
}

double EvaluateLer(const Model& model, const std::vector<Utterance>& utterances,
                   std::size_t threads) {
  (void)threads;
  ErrorCounts pooled;
  for (const auto& u : utterances) {
    const ForwardResult fwd = NetworkForward(u.features, model, u.language_id);
    const auto hyp =
        GreedyDecodeRestricted(fwd.log_probs, model.phones.LanguageIndices(u.language_id));
    pooled += EditDistance(u.labels, hyp);
  }
  return LabelErrorRate(pooled);
}

double Median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string ExperimentReport::Format() const {
  std::ostringstream out;
  out << "# experiment " << name << "\n"
      << "# synthetic-data phone LER trends (percent); not the published WER values\n"
      << table;
  for (const auto& c : checks) out << "# " << c << "\n";
  out << "# verdict " << (pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

ExperimentContext::ExperimentContext(ExperimentConfig config) : config_(std::move(config)) {}

void ExperimentContext::Log(const std::string& msg) const {
  if (config_.progress) config_.progress(msg);
}

const SyntheticWorld& ExperimentContext::World(std::uint64_t seed) {
  auto it = worlds_.find(seed);
  if (it == worlds_.end()) it = worlds_.emplace(seed, BuildWorld(config_, seed)).first;
  return it->second;
}

Model ExperimentContext::TrainModel(Model model, const std::vector<Utterance>& train,
                                    const std::vector<Utterance>& val, TrainConfig config,
                                    std::uint64_t seed) {
  config.seed = seed;
  config.threads = config_.threads;
  return RunTraining(std::move(model), train, val, config).best_model;
}

const Model& ExperimentContext::SourceModel(std::uint64_t seed, bool lhuc) {
  const std::string key = "ml3/" + std::to_string(seed) + (lhuc ? "/lhuc" : "");
  if (auto it = models_.find(key); it != models_.end()) return it->second;
  const SyntheticWorld& w = World(seed);
  const UniversalPhoneSet set = MergePhoneSets(std::span(w.languages).first(3));
  std::vector<std::vector<Utterance>> train, val;
  for (const auto& lang : kSources) {
    train.push_back(Reencode(w.data.at(lang).Select(Split::kTrain), w.all_phones, set));
    val.push_back(Reencode(w.data.at(lang).Select(Split::kVal), w.all_phones, set));
  }
  ModelConfig mc{config_.num_layers, config_.hidden_size, config_.feature_dim, false};
  TrainConfig tc = config_.source_training;
  tc.lhuc_enabled = lhuc;
  Log("training " + key);
  Model m = TrainModel(CreateModel(mc, set, {}, Mix(seed, 2)), Concat(train), Concat(val), tc,
                       Mix(seed, 3));
  return models_.emplace(key, std::move(m)).first->second;
}

const Model& ExperimentContext::FourLanguageModel(std::uint64_t seed) {
  const std::string key = "ml4/" + std::to_string(seed);
  if (auto it = models_.find(key); it != models_.end()) return it->second;
  const SyntheticWorld& w = World(seed);
  const UniversalPhoneSet set = MergePhoneSets(std::span(w.languages).first(4));
  std::vector<std::vector<Utterance>> train, val;
  for (const auto& lang : {"L1", "L2", "L3", "L4"}) {
    train.push_back(Reencode(w.data.at(lang).Select(Split::kTrain), w.all_phones, set));
    val.push_back(Reencode(w.data.at(lang).Select(Split::kVal), w.all_phones, set));
  }
  ModelConfig mc{config_.num_layers, config_.hidden_size, config_.feature_dim, false};
  Log("training " + key);
  Model m = TrainModel(CreateModel(mc, set, {}, Mix(seed, 2)), Concat(train), Concat(val),
                       config_.source_training, Mix(seed, 3));
  return models_.emplace(key, std::move(m)).first->second;
}

double ExperimentContext::MonoRun(std::uint64_t seed, const std::string& language) {
  const std::string key = "mono/" + std::to_string(seed) + "/" + language;
  if (auto it = runs_.find(key); it != runs_.end()) return it->second;
  const SyntheticWorld& w = World(seed);
  const LanguagePhoneMap& map = *std::find_if(
      w.languages.begin(), w.languages.end(),
      [&](const LanguagePhoneMap& m) { return m.language_id == language; });
  const UniversalPhoneSet set = MergePhoneSets(std::vector<LanguagePhoneMap>{map});
  const Dataset& d = w.data.at(language);
  ModelConfig mc{config_.num_layers, config_.hidden_size, config_.feature_dim, false};
  Log("training " + key);
  const Model m = TrainModel(CreateModel(mc, set, {}, Mix(seed, 2)),
                             Reencode(d.Select(Split::kTrain), w.all_phones, set),
                             Reencode(d.Select(Split::kVal), w.all_phones, set),
                             config_.source_training, Mix(seed, 3));
  const double ler =
      EvaluateLer(m, Reencode(d.Select(Split::kTest), w.all_phones, set), config_.threads);
  return runs_[key] = ler;
}

double ExperimentContext::TargetRun(std::uint64_t seed, const std::string& target,
                                    const std::string& seed_model, const std::string& strategy,
                                    double fraction, bool dropout) {
  const std::string key = "target/" + std::to_string(seed) + "/" + target + "/" + seed_model +
                          "/" + strategy + "/" + FractionKey(fraction) + (dropout ? "/do" : "");
  if (auto it = runs_.find(key); it != runs_.end()) return it->second;
  const SyntheticWorld& w = World(seed);
  const LanguagePhoneMap& map = *std::find_if(
      w.languages.begin(), w.languages.end(),
      [&](const LanguagePhoneMap& m) { return m.language_id == target; });
  const Dataset& d = w.data.at(target);

  // Nested subsets: the same rng seed for every fraction.
  Rng subset_rng(Mix(seed, 4));
  std::vector<Utterance> train = SubsetHours(d.Select(Split::kTrain), fraction, subset_rng);
  std::vector<Utterance> val = d.Select(Split::kVal);
  if (val.size() > config_.max_val_utterances) {
    Rng val_rng(Mix(seed, 5));
    val = SubsetHours(val,
                      static_cast<double>(config_.max_val_utterances) /
                          static_cast<double>(val.size()),
                      val_rng);
  }
  const std::size_t base = train.size();
  for (std::size_t i = 0; train.size() < config_.min_epoch_utterances; ++i)
    train.push_back(train[i % base]);

  TrainConfig tc = config_.target_training;
  if (dropout) tc.dropout_rate = config_.dropout_rate;
  ModelConfig mc{config_.num_layers, config_.hidden_size, config_.feature_dim, false};
  Rng adapt_rng(Mix(seed, 6));
  Model model;
  if (strategy == "scratch") {
    model = CreateModel(mc, MergePhoneSets(std::vector<LanguagePhoneMap>{map}), {},
                        Mix(seed, 7));
  } else {
    const Model& source = seed_model == "ml4" ? FourLanguageModel(seed) : SourceModel(seed);
    const AdaptationStrategy s = ParseStrategy(strategy);
    AdaptedModel adapted;
    if (s == AdaptationStrategy::kExtendAll) {
      const PhoneSetExtension ext = Extend(source.phones, map);
      adapted = ExtendOutputLayer(source, source.phones, ext.set, ext.index_map, adapt_rng);
    } else {
      adapted = ReplaceOutputLayer(source, MergePhoneSets(std::vector<LanguagePhoneMap>{map}),
                                   s == AdaptationStrategy::kReplaceFrozen, adapt_rng);
    }
    tc.freeze_mask = adapted.plan.freeze_mask;
    model = std::move(adapted.model);
  }
  const UniversalPhoneSet set = model.phones;
  Log("training " + key + " (" + std::to_string(base) + " utterances)");
  const Model trained = TrainModel(std::move(model), Reencode(train, w.all_phones, set),
                                   Reencode(val, w.all_phones, set), tc, Mix(seed, 8));
  const double ler = EvaluateLer(
      trained, Reencode(d.Select(Split::kTest), w.all_phones, set), config_.threads);
  Log(key + " ler " + Fmt(ler));
  return runs_[key] = ler;
}

ExperimentReport RunTable1Trend(ExperimentContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = ctx.config();
  ExperimentReport r;
  r.name = "table1-trend";
  std::map<std::string, std::map<std::string, std::vector<double>>> ler;  // system -> lang
  std::ostringstream table;
  table << "system\tseed\tL1\tL2\tL3\n";
  for (std::uint64_t seed : cfg.seeds) {
    const SyntheticWorld& w = ctx.World(seed);
    std::map<std::string, std::string> line;
    for (const auto& lang : kSources) ler["mono"][lang].push_back(ctx.MonoRun(seed, lang));
    for (bool lhuc : {false, true}) {
      const Model& m = ctx.SourceModel(seed, lhuc);
      for (const auto& lang : kSources)
        ler[lhuc ? "multi+lhuc" : "multi"][lang].push_back(EvaluateLer(
            m, Reencode(w.data.at(lang).Select(Split::kTest), w.all_phones, m.phones),
            cfg.threads));
    }
    for (const auto& sys : {"mono", "multi", "multi+lhuc"}) {
      table << sys << '\t' << seed;
      for (const auto& lang : kSources) table << '\t' << Fmt(ler[sys][lang].back());
      table << '\n';
    }
  }
  for (const auto& sys : {"mono", "multi", "multi+lhuc"}) {
    table << sys << "\tmedian";
    for (const auto& lang : kSources) table << '\t' << Fmt(Median(ler[sys][lang]));
    table << '\n';
  }
  int wins = 0;
  for (const auto& lang : kSources) {
    const double a = Median(ler["multi+lhuc"][lang]), b = Median(ler["multi"][lang]);
    wins += a <= b;
    r.checks.push_back(Check(a <= b, lang + " multi+lhuc " + Fmt(a) + " <= multi " + Fmt(b)));
  }
  r.pass = wins >= 2;
  r.checks.push_back(Check(r.pass, "multi+lhuc <= multi on " + std::to_string(wins) +
                                       " of 3 languages (need 2)"));
  r.table = table.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentReport RunFig2Curve(ExperimentContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = ctx.config();
  const std::vector<std::string> systems{"scratch", "replace-frozen", "replace-all",
                                         "extend-all"};
  ExperimentReport r;
  r.name = "fig2-curve";
  std::map<std::string, std::map<double, double>> med;
  std::ostringstream table;
  table << "system\tfraction";
  for (auto s : cfg.seeds) table << "\tseed" << s;
  table << "\tmedian\n";
  for (double f : cfg.fig2_fractions)
    for (const auto& sys : systems) {
      std::vector<double> v;
      for (std::uint64_t seed : cfg.seeds)
        v.push_back(ctx.TargetRun(seed, "L4", "ml3", sys, f, false));
      med[sys][f] = Median(v);
      table << sys << '\t' << FractionKey(f);
      for (double x : v) table << '\t' << Fmt(x);
      table << '\t' << Fmt(med[sys][f]) << '\n';
    }
  r.pass = true;
  auto check = [&](bool ok, const std::string& text) {
    r.checks.push_back(Check(ok, text));
    r.pass = r.pass && ok;
  };
  for (double f : cfg.fig2_fractions) {
    if (f > 0.05 + 1e-12) continue;
    for (const auto& sys : {"replace-frozen", "replace-all", "extend-all"})
      check(med[sys][f] < med["scratch"][f], std::string("(a) ") + sys + " " +
                                                  Fmt(med[sys][f]) + " < scratch " +
                                                  Fmt(med["scratch"][f]) + " at " + FractionKey(f));
  }
  for (double f : cfg.fig2_fractions) {
    if (f >= 1.0) continue;
    check(med["replace-all"][f] <= med["replace-frozen"][f],
          "(b) replace-all " + Fmt(med["replace-all"][f]) + " <= replace-frozen " +
              Fmt(med["replace-frozen"][f]) + " at " + FractionKey(f));
  }
  if (std::count(cfg.fig2_fractions.begin(), cfg.fig2_fractions.end(), 0.01))
    check(med["extend-all"][0.01] <= med["replace-all"][0.01],
          "(c) extend-all " + Fmt(med["extend-all"][0.01]) + " <= replace-all " +
              Fmt(med["replace-all"][0.01]) + " at 0.01");
  r.table = table.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentReport RunTable2Coverage(ExperimentContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = ctx.config();
  ExperimentReport r;
  r.name = "table2-coverage";
  r.pass = true;
  const auto langs = ExperimentLanguages();
  const UniversalPhoneSet ml3 = MergePhoneSets(std::span(langs).first(3));
  const UniversalPhoneSet ml4 = MergePhoneSets(std::span(langs).first(4));
  const std::size_t cov3 = Coverage(ml3, langs[4]).covered_count;
  const std::size_t cov4 = Coverage(ml4, langs[4]).covered_count;
  std::ostringstream table;
  table << "seed_model\tcoverage\tfraction";
  for (auto s : cfg.seeds) table << "\tseed" << s;
  table << "\tmedian\n";
  r.checks.push_back(Check(cov4 > cov3, "L5 coverage ml4 " + std::to_string(cov4) + " > ml3 " +
                                            std::to_string(cov3) + " of " +
                                            std::to_string(langs[4].phones.size())));
  r.pass = cov4 > cov3;
  for (double f : cfg.table2_fractions) {
    std::map<std::string, double> med;
    for (const auto& sm : {"ml3", "ml4"}) {
      std::vector<double> v;
      for (std::uint64_t seed : cfg.seeds)
        v.push_back(ctx.TargetRun(seed, "L5", sm, "extend-all", f, false));
      med[sm] = Median(v);
      table << sm << '\t' << (std::string(sm) == "ml3" ? cov3 : cov4) << '/'
            << langs[4].phones.size() << '\t' << FractionKey(f);
      for (double x : v) table << '\t' << Fmt(x);
      table << '\t' << Fmt(med[sm]) << '\n';
    }
    const bool ok = med["ml4"] <= med["ml3"];
    r.pass = r.pass && ok;
    r.checks.push_back(Check(ok, "ml4 seed " + Fmt(med["ml4"]) + " <= ml3 seed " +
                                     Fmt(med["ml3"]) + " at " + FractionKey(f)));
  }
  r.table = table.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentReport RunTable3Dropout(ExperimentContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = ctx.config();
  ExperimentReport r;
  r.name = "table3-dropout";
  r.pass = true;
  const double f = cfg.table3_fraction;
  std::ostringstream table;
  table << "system\tdropout\tfraction";
  for (auto s : cfg.seeds) table << "\tseed" << s;
  table << "\tmedian\n";
  for (const auto& sys : {"scratch", "extend-all"}) {
    std::map<bool, double> med;
    for (bool dropout : {false, true}) {
      std::vector<double> v;
      for (std::uint64_t seed : cfg.seeds)
        v.push_back(ctx.TargetRun(seed, "L4", "ml3", sys, f, dropout));
      med[dropout] = Median(v);
      table << sys << '\t' << (dropout ? Fmt(cfg.dropout_rate) : "0") << '\t'
            << FractionKey(f);
      for (double x : v) table << '\t' << Fmt(x);
      table << '\t' << Fmt(med[dropout]) << '\n';
    }
    const bool ok = med[true] <= med[false];
    r.pass = r.pass && ok;
    r.checks.push_back(Check(ok, std::string(sys) + " with dropout " + Fmt(med[true]) +
                                     " <= without " + Fmt(med[false])));
  }
  r.table = table.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

const std::vector<std::string>& ExperimentNames() {
  static const std::vector<std::string> names{"table1-trend", "fig2-curve", "table2-coverage",
                                              "table3-dropout"};
  return names;
}

ExperimentReport RunExperiment(const std::string& name, ExperimentContext& ctx) {
  if (name == "table1-trend") return RunTable1Trend(ctx);
  if (name == "fig2-curve") return RunFig2Curve(ctx);
  if (name == "table2-coverage") return RunTable2Coverage(ctx);
  if (name == "table3-dropout") return RunTable3Dropout(ctx);
  throw DomainError("unknown experiment '" + name + "'");
}

}  // namespace mlctc

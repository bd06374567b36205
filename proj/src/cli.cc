// src/cli.cc

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

#include "mlctc/cli.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlctc/adaptation.h"
#include "mlctc/corpus.h"
#include "mlctc/decode.h"
#include "mlctc/errors.h"
#include "mlctc/experiments.h"
#include "mlctc/io.h"
#include "mlctc/network.h"
#include "mlctc/phoneset.h"
#include "mlctc/training.h"

namespace mlctc {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string HashFile(const std::string& path) { return Sha256Hex(ReadFile(path)); }

Json HashDataset(const std::string& dir) {
  Json j;
  for (const char* f : {"phones.txt", "manifest.tsv", "features.bin"})
    j[f] = HashFile(dir + "/" + f);
  return j;
}

struct Manifest {
  Json j;

  Manifest(const std::string& command, const std::vector<std::string>& args) {
    j["tool"] = "mlctc";
    j["command"] = command;
    j["args"] = args;
    j["inputs"] = Json::object();
    j["outputs"] = Json::object();
    j["seeds"] = Json::object();
    j["config"] = Json::object();
  }
  void Input(const std::string& path) { j["inputs"][path] = HashFile(path); }
  void InputDataset(const std::string& dir) { j["inputs"][dir] = HashDataset(dir); }
  void Output(const std::string& path) { j["outputs"][path] = HashFile(path); }
  void Write(const std::string& path) const { WriteFile(path, j.dump(2) + "\n"); }
};

UniversalPhoneSet ReadPhoneSet(const std::string& path) {
  return UniversalPhoneSet::Parse(ReadFile(path));
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// Utterances of the chosen split and languages, labels in `set`.
std::vector<Utterance> SelectData(const LoadedDataset& data, Split split,
                                  const std::set<std::string>& languages,
                                  const UniversalPhoneSet& set) {
  std::vector<Utterance> out;
  for (const auto& u : data.dataset.utterances)
    if (u.split == split && (languages.empty() || languages.count(u.language_id)))
      out.push_back(u);
  return Reencode(out, data.phones, set);
}

std::set<std::string> LanguagesIn(const LoadedDataset& data) {
  std::set<std::string> out;
  for (const auto& u : data.dataset.utterances) out.insert(u.language_id);
  return out;
}

LanguagePhoneMap LanguageMapFrom(const UniversalPhoneSet& set, const std::string& lang) {
  std::vector<std::string> phones;
  for (std::size_t i : set.LanguageIndices(lang))
    if (i != 0) phones.push_back(set.symbol(i));
  return LanguagePhoneMap::Make(lang, phones);
}

// Training flags shared by train and adapt.
struct TrainFlags {
  std::string config_path;
  std::optional<double> lr, momentum, dropout, clip_norm;
  std::optional<std::size_t> batch_size, max_epochs, patience, threads;
  bool lhuc = false;
  bool record_wall_time = false;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON file with training keys")
        ->check(CLI::ExistingFile);
    app->add_option("--lr", lr, "learning rate");
    app->add_option("--momentum", momentum);
    app->add_option("--batch-size", batch_size);
    app->add_option("--max-epochs", max_epochs);
    app->add_option("--patience", patience);
    app->add_option("--dropout", dropout, "dropout rate");
    app->add_option("--clip-norm", clip_norm);
    app->add_option("--threads", threads, "per-utterance worker threads");
    app->add_flag("--lhuc", lhuc, "language adaptive training with LHUC");
    app->add_flag("--record-wall-time", record_wall_time,
                  "write elapsed seconds into the training log");
  }

  TrainConfig Build(std::uint64_t seed) const {
    TrainConfig c;
    if (!config_path.empty()) c = ParseTrainConfig(ReadFile(config_path));
    if (lr) c.learning_rate = *lr;
    if (momentum) c.momentum = *momentum;
    if (dropout) c.dropout_rate = *dropout;
    if (clip_norm) c.clip_norm = *clip_norm;
    if (batch_size) c.batch_size = *batch_size;
    if (max_epochs) c.max_epochs = *max_epochs;
    if (patience) c.patience = *patience;
    if (threads) c.threads = *threads;
    if (lhuc) c.lhuc_enabled = true;
    c.seed = seed;
    c.Validate();
    return c;
  }
};

// Runs training and writes log, per-improvement checkpoints and final.ckpt.
void TrainAndWrite(Model model, const std::vector<Utterance>& train,
                   const std::vector<Utterance>& val, const TrainConfig& config,
                   const std::string& out_dir, bool record_wall_time, Manifest& manifest,
                   std::ostream& out) {
  fs::create_directories(out_dir);
  const std::string log_path = out_dir + "/train.log";
  std::string log = "epoch\ttrain_loss\tval_loss\tskipped\twall_seconds\n";
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> checkpoints;
  TrainingCallbacks cb;
  cb.on_epoch = [&](const EpochReport& r) {
    std::string wall = "NA";
    if (record_wall_time) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      wall = buf;
    }
    const std::string line = FormatEpochLine(r, wall);
    log += line;
    out << line << std::flush;
  };
  cb.on_improvement = [&](const EpochReport& r, const Model& m) {
    const std::string path = out_dir + "/epoch-" + std::to_string(r.epoch) + ".ckpt";
    SaveCheckpoint(m, path);
    checkpoints.push_back(path);
  };
  const TrainingResult result = RunTraining(std::move(model), train, val, config, cb);
  WriteFile(log_path, log);
  const std::string final_path = out_dir + "/final.ckpt";
  SaveCheckpoint(result.best_model, final_path);
  manifest.j["result"] = {{"best_epoch", result.best_epoch},
                          {"epochs_run", result.reports.size()},
                          {"initial_val_loss", result.initial_val_loss}};
  manifest.j["config"]["train"] = Json::parse(SerializeTrainConfig(config));
  manifest.Output(log_path);
  for (const auto& c : checkpoints) manifest.Output(c);
  manifest.Output(final_path);
}

std::uint64_t TrainSeed(std::uint64_t seed) { return seed ^ 0x7472616e73656564ULL; }

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mlctc: multilingual CTC toolkit"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  auto needs_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "seed for every random draw")->required();
  };
  auto manifest_opt = [&](CLI::App* sub) {
    sub->add_option("--manifest", manifest_path, "reproducibility manifest path");
  };

  // phoneset-merge
  auto* merge = app.add_subcommand("phoneset-merge", "merge language maps into a universal set");
  std::vector<std::string> merge_maps;
  std::string merge_out;
  merge->add_option("--maps", merge_maps, "language map files")->required()->check(CLI::ExistingFile);
  merge->add_option("--out", merge_out, "output phone-set file")->required();
  manifest_opt(merge);

  // phoneset-coverage
  auto* cov = app.add_subcommand("phoneset-coverage", "coverage of a target language");
  std::string cov_set, cov_target, cov_out;
  cov->add_option("--set", cov_set, "universal phone-set file")->required()->check(CLI::ExistingFile);
  cov->add_option("--target", cov_target, "target language map")->required()->check(CLI::ExistingFile);
  cov->add_option("--out", cov_out, "optional report file");
  manifest_opt(cov);

  // data-gen
  auto* gen = app.add_subcommand("data-gen", "generate a synthetic multilingual dataset");
  std::vector<std::string> gen_maps;
  std::string gen_out;
  std::size_t gen_utts = 200, gen_dim = 8, gen_speakers = 10, gen_val = 2, gen_test = 2;
  double gen_accent = 0.5, gen_spk = 0.3, gen_noise = 0.5;
  std::vector<std::size_t> gen_ppu{3, 6}, gen_fpp{2, 4};
  gen->add_option("--maps", gen_maps, "language map files")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--utterances", gen_utts, "utterances per language");
  gen->add_option("--feature-dim", gen_dim);
  gen->add_option("--speakers", gen_speakers);
  gen->add_option("--val-speakers", gen_val);
  gen->add_option("--test-speakers", gen_test);
  gen->add_option("--accent", gen_accent, "accent offset scale");
  gen->add_option("--speaker-offset", gen_spk);
  gen->add_option("--noise", gen_noise);
  gen->add_option("--phones-per-utterance", gen_ppu)->expected(2);
  gen->add_option("--frames-per-phone", gen_fpp)->expected(2);
  needs_seed(gen);
  manifest_opt(gen);

  // train
  auto* train = app.add_subcommand("train", "multilingual training from scratch or a checkpoint");
  std::string train_data, train_out, train_phones, train_langs, train_init;
  std::size_t train_layers = ModelConfig{}.num_layers, train_hidden = ModelConfig{}.hidden_size;
  TrainFlags train_flags;
  train->add_option("--data", train_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--phones", train_phones, "model phone set (default: the dataset's)")
      ->check(CLI::ExistingFile);
  train->add_option("--languages", train_langs, "comma-separated training languages");
  train->add_option("--init", train_init, "start from this checkpoint")->check(CLI::ExistingFile);
  train->add_option("--layers", train_layers);
  train->add_option("--hidden", train_hidden);
  train_flags.Register(train);
  needs_seed(train);
  manifest_opt(train);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "cross-lingual adaptation to a target language");
  std::string adapt_strategy, adapt_source, adapt_lang, adapt_data, adapt_out;
  double adapt_fraction = 1.0;
  bool adapt_target_lhuc = false;
  TrainFlags adapt_flags;
  adapt->add_option("--strategy", adapt_strategy)
      ->required()
      ->check(CLI::IsMember({"replace-frozen", "replace-all", "extend-all"}));
  adapt->add_option("--source", adapt_source, "source checkpoint")->required()->check(CLI::ExistingFile);
  adapt->add_option("--target-lang", adapt_lang)->required();
  adapt->add_option("--data", adapt_data, "dataset directory with the target language")
      ->required()
      ->check(CLI::ExistingDirectory);
  adapt->add_option("--out", adapt_out, "output directory")->required();
  adapt->add_option("--fraction", adapt_fraction, "fraction of target training data");
  adapt->add_flag("--target-lhuc", adapt_target_lhuc, "fresh LHUC vectors for the target");
  adapt_flags.Register(adapt);
  needs_seed(adapt);
  manifest_opt(adapt);

  // decode
  auto* dec = app.add_subcommand("decode", "greedy decoding of a dataset split");
  std::string dec_model, dec_data, dec_out, dec_split = "test", dec_langs;
  bool dec_unrestricted = false;
  dec->add_option("--model", dec_model)->required()->check(CLI::ExistingFile);
  dec->add_option("--data", dec_data)->required()->check(CLI::ExistingDirectory);
  dec->add_option("--out", dec_out, "hypothesis file")->required();
  dec->add_option("--split", dec_split)->check(CLI::IsMember({"train", "val", "test"}));
  dec->add_option("--languages", dec_langs, "comma-separated languages");
  dec->add_flag("--unrestricted", dec_unrestricted, "argmax over the whole phone set");
  manifest_opt(dec);

  // score
  auto* score = app.add_subcommand("score", "label error rate of a hypothesis file");
  std::string score_data, score_hyp, score_out, score_split = "test";
  score->add_option("--data", score_data)->required()->check(CLI::ExistingDirectory);
  score->add_option("--hyp", score_hyp)->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "report file")->required();
  score->add_option("--split", score_split)->check(CLI::IsMember({"train", "val", "test"}));
  manifest_opt(score);

  // experiment
  auto* exp = app.add_subcommand("experiment", "synthetic trend experiment");
  std::string exp_name, exp_out;
  std::size_t exp_threads = 1;
  exp->add_option("name", exp_name)->required()->check(CLI::IsMember(ExperimentNames()));
  exp->add_option("--out", exp_out, "report file")->required();
  exp->add_option("--threads", exp_threads);
  bool exp_verbose = false;
  exp->add_flag("--verbose", exp_verbose, "progress on standard error");
  needs_seed(exp);
  manifest_opt(exp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  Manifest manifest(command, args);
  if (seed) manifest.j["seeds"]["seed"] = *seed;
  auto finish = [&](const std::string& default_path) {
    manifest.Write(manifest_path.empty() ? default_path : manifest_path);
  };

  try {
    if (command == "phoneset-merge") {
      std::vector<LanguagePhoneMap> maps;
      for (const auto& p : merge_maps) {
        maps.push_back(ParseLanguageMap(ReadFile(p)));
        manifest.Input(p);
      }
      const UniversalPhoneSet set = MergePhoneSets(maps);
      WriteFile(merge_out, set.Serialize());
      manifest.Output(merge_out);
      out << "symbols " << set.size() << " (blank included), languages " << maps.size()
          << "\n";
      finish(merge_out + ".repro.json");
    } else if (command == "phoneset-coverage") {
      const UniversalPhoneSet set = ReadPhoneSet(cov_set);
      const LanguagePhoneMap target = ParseLanguageMap(ReadFile(cov_target));
      manifest.Input(cov_set);
      manifest.Input(cov_target);
      const CoverageReport rep = Coverage(set, target);
      std::ostringstream text;
      text << "target\t" << target.language_id << "\n"
           << "covered\t" << rep.covered_count;
      for (const auto& p : rep.covered) text << '\t' << p.ipa();
      text << "\nunseen\t" << rep.unseen.size();
      for (const auto& p : rep.unseen) text << '\t' << p.ipa();
      text << "\n";
      out << text.str();
      if (!cov_out.empty()) {
        WriteFile(cov_out, text.str());
        manifest.Output(cov_out);
      }
      finish(cov_out.empty() ? "phoneset-coverage.repro.json" : cov_out + ".repro.json");
    } else if (command == "data-gen") {
      std::vector<LanguagePhoneMap> maps;
      for (const auto& p : gen_maps) {
        maps.push_back(ParseLanguageMap(ReadFile(p)));
        manifest.Input(p);
      }
      const UniversalPhoneSet set = MergePhoneSets(maps);
      Rng rng(*seed);
      const PhonePrototypeBank bank = BuildPrototypeBank(set, gen_dim, rng);
      Dataset all;
      for (const auto& map : maps) {
        SyntheticLanguageSpec spec;
        spec.phones = map;
        spec.utterance_count = gen_utts;
        spec.phones_per_utterance = {gen_ppu[0], gen_ppu[1]};
        spec.frames_per_phone = {gen_fpp[0], gen_fpp[1]};
        spec.accent_offset_scale = gen_accent;
        spec.speaker_offset_scale = gen_spk;
        spec.noise_std = gen_noise;
        spec.speaker_count = gen_speakers;
        spec.val_speakers = gen_val;
        spec.test_speakers = gen_test;
        Rng lang_rng = rng.Split();
        all.Append(GenerateLanguage(spec, bank, set, lang_rng));
      }
      all = NormalizePerSpeaker(all);
      SaveDataset(gen_out, all, set);
      manifest.j["config"] = {{"utterances", gen_utts},     {"feature_dim", gen_dim},
                              {"speakers", gen_speakers},   {"val_speakers", gen_val},
                              {"test_speakers", gen_test},  {"accent", gen_accent},
                              {"speaker_offset", gen_spk},  {"noise", gen_noise},
                              {"phones_per_utterance", gen_ppu},
                              {"frames_per_phone", gen_fpp}};
      manifest.InputDataset(gen_out);
      manifest.j["outputs"] = manifest.j["inputs"][gen_out];
      manifest.j["inputs"].erase(gen_out);
      out << "utterances " << all.utterances.size() << "\n";
      finish(gen_out + "/repro.json");
    } else if (command == "train") {
      const LoadedDataset data = LoadDataset(train_data);
      manifest.InputDataset(train_data);
      std::set<std::string> langs;
      for (const auto& l : SplitCommas(train_langs)) langs.insert(l);
      if (langs.empty()) langs = LanguagesIn(data);
      const TrainConfig tc = train_flags.Build(TrainSeed(*seed));
      Model model;
      if (!train_init.empty()) {
        model = LoadCheckpoint(train_init);
        manifest.Input(train_init);
      } else {
        UniversalPhoneSet set = data.phones;
        if (!train_phones.empty()) {
          set = ReadPhoneSet(train_phones);
          manifest.Input(train_phones);
        }
        const std::size_t F = data.dataset.utterances.empty()
                                  ? 0
                                  : data.dataset.utterances.front().features.cols();
        ModelConfig mc{train_layers, train_hidden, F, false};
        model = CreateModel(mc, set, {}, *seed);
        manifest.j["config"]["model"] = {{"layers", train_layers},
                                         {"hidden", train_hidden},
                                         {"feature_dim", F}};
      }
      manifest.j["seeds"]["init"] = model.init_seed;
      manifest.j["seeds"]["train"] = tc.seed;
      manifest.j["config"]["languages"] = langs;
      const auto tr = SelectData(data, Split::kTrain, langs, model.phones);
      const auto va = SelectData(data, Split::kVal, langs, model.phones);
      TrainAndWrite(std::move(model), tr, va, tc, train_out, train_flags.record_wall_time,
                    manifest, out);
      finish(train_out + "/repro.json");
    } else if (command == "adapt") {
      const LoadedDataset data = LoadDataset(adapt_data);
      manifest.InputDataset(adapt_data);
      manifest.Input(adapt_source);
      const Model source = LoadCheckpoint(adapt_source);
      const LanguagePhoneMap target = LanguageMapFrom(data.phones, adapt_lang);
      const AdaptationStrategy strategy = ParseStrategy(adapt_strategy);
      Rng rng(*seed);
      AdaptationOptions opts;
      if (adapt_target_lhuc) opts.target_lhuc_language = adapt_lang;
      AdaptedModel adapted;
      if (strategy == AdaptationStrategy::kExtendAll) {
        const PhoneSetExtension ext = Extend(source.phones, target);
        adapted = ExtendOutputLayer(source, source.phones, ext.set, ext.index_map, rng, opts);
      } else {
        adapted = ReplaceOutputLayer(source,
                                     MergePhoneSets(std::vector<LanguagePhoneMap>{target}),
                                     strategy == AdaptationStrategy::kReplaceFrozen, rng, opts);
      }
      TrainConfig tc = adapt_flags.Build(TrainSeed(*seed));
      tc.freeze_mask = adapted.plan.freeze_mask;
      tc.lhuc_enabled = tc.lhuc_enabled && adapt_target_lhuc;
      const std::set<std::string> langs{adapt_lang};
      std::vector<Utterance> tr = SelectData(data, Split::kTrain, langs, adapted.model.phones);
      if (adapt_fraction < 1.0) {
        Rng subset_rng(*seed ^ 0x737562736574ULL);
        tr = SubsetHours(tr, adapt_fraction, subset_rng);
      }
      const auto va = SelectData(data, Split::kVal, langs, adapted.model.phones);
      fs::create_directories(adapt_out);
      WriteFile(adapt_out + "/adaptation.json",
                AdaptationManifest(adapted, source.phoneset_version));
      SaveCheckpoint(adapted.model, adapt_out + "/init.ckpt");
      WriteFile(adapt_out + "/phones.txt", adapted.model.phones.Serialize());
      manifest.Output(adapt_out + "/adaptation.json");
      manifest.Output(adapt_out + "/init.ckpt");
      manifest.j["config"]["strategy"] = adapt_strategy;
      manifest.j["config"]["fraction"] = adapt_fraction;
      manifest.j["config"]["target_language"] = adapt_lang;
      manifest.j["config"]["train_utterances"] = tr.size();
      manifest.j["seeds"]["train"] = tc.seed;
      TrainAndWrite(std::move(adapted.model), tr, va, tc, adapt_out,
                    adapt_flags.record_wall_time, manifest, out);
      finish(adapt_out + "/repro.json");
    } else if (command == "decode") {
      const LoadedDataset data = LoadDataset(dec_data);
      const Model model = LoadCheckpoint(dec_model);
      manifest.InputDataset(dec_data);
      manifest.Input(dec_model);
      std::set<std::string> langs;
      for (const auto& l : SplitCommas(dec_langs)) langs.insert(l);
      if (langs.empty())
        for (const auto& l : LanguagesIn(data))
          if (model.phones.HasLanguage(l)) langs.insert(l);
      std::vector<ScoredUtterance> hyps;
      for (const auto& u : data.dataset.utterances) {
        if (u.split != ParseSplit(dec_split) || !langs.count(u.language_id)) continue;
        const ForwardResult fwd = NetworkForward(u.features, model, u.language_id);
        ScoredUtterance s{u.id, u.language_id, {}, {}};
        s.hypothesis = dec_unrestricted
                           ? GreedyDecode(fwd.log_probs)
                           : GreedyDecodeRestricted(fwd.log_probs,
                                                    model.phones.LanguageIndices(u.language_id));
        hyps.push_back(std::move(s));
      }
      WriteFile(dec_out, FormatHypotheses(model.phones, hyps));
      manifest.Output(dec_out);
      out << "decoded " << hyps.size() << " utterances\n";
      finish(dec_out + ".repro.json");
    } else if (command == "score") {
      const LoadedDataset data = LoadDataset(score_data);
      manifest.InputDataset(score_data);
      manifest.Input(score_hyp);
      const auto hyps = ParseHypotheses(ReadFile(score_hyp));
      std::vector<ScoredUtterance> scored;
      std::set<std::string> used;
      for (const auto& u : data.dataset.utterances) {
        auto it = hyps.find(u.id);
        if (it == hyps.end()) continue;
        if (u.split != ParseSplit(score_split))
          throw DomainError("hypothesis '" + u.id + "' is not in the " + score_split + " split");
        used.insert(u.id);
        scored.push_back({u.id, u.language_id, u.labels,
                          EncodeLabels(data.phones, u.language_id, it->second)});
      }
      for (const auto& [id, _] : hyps)
        if (!used.count(id)) throw LookupError("hypothesis for unknown utterance '" + id + "'");
      const ScoreReport report = Score(scored);
      WriteFile(score_out, report.Format());
      manifest.Output(score_out);
      out << report.Format();
      finish(score_out + ".repro.json");
    } else if (command == "experiment") {
      ExperimentConfig cfg;
      cfg.seeds = {*seed, *seed + 1, *seed + 2};
      cfg.threads = exp_threads;
      if (exp_verbose) cfg.progress = [&err](const std::string& m) { err << m << "\n"; };
      ExperimentContext ctx(cfg);
      const ExperimentReport report = RunExperiment(exp_name, ctx);
      WriteFile(exp_out, report.Format());
      manifest.Output(exp_out);
      manifest.j["seeds"]["experiment_seeds"] = cfg.seeds;
      manifest.j["config"]["experiment"] = exp_name;
      out << report.Format();
      finish(exp_out + ".repro.json");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace mlctc

// include/mlctc/experiments.h

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

#ifndef MLCTC_EXPERIMENTS_H_
#define MLCTC_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mlctc/corpus.h"
#include "mlctc/decode.h"
#include "mlctc/network.h"
#include "mlctc/training.h"

namespace mlctc {

/// Knobs shared by the synthetic trend experiments. Every number in a report
/// is a phone-level label error rate on synthetic data.
struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t feature_dim = 8;
  std::size_t num_layers = 1;
  std::size_t hidden_size = 48;
  std::size_t source_utterances = 600;  // per source language
  std::size_t target_utterances = 600;
  double accent_offset_scale = 0.3;
  double speaker_offset_scale = 0.3;
  double noise_std = 1.0;
  TrainConfig source_training;
  TrainConfig target_training;
  /// Small target subsets are repeated so every epoch has at least this many
  /// utterances.
  std::size_t min_epoch_utterances = 64;
  /// Target-language validation is capped at this many utterances.
  std::size_t max_val_utterances = 80;
  double dropout_rate = 0.2;
  std::vector<double> fig2_fractions{0.01, 0.05, 0.25, 1.0};
  std::vector<double> table2_fractions{0.01, 0.05};
  double table3_fraction = 0.05;
  std::size_t threads = 1;
  std::function<void(const std::string&)> progress;

  ExperimentConfig();
};

/// Five synthetic languages. L1-L3 are the source languages, L4 the data-fraction
/// target, L5 the coverage target. L5 shares phones with L4 that L1-L3 lack.
std::vector<LanguagePhoneMap> ExperimentLanguages();

struct SyntheticWorld {
  std::vector<LanguagePhoneMap> languages;
  UniversalPhoneSet all_phones;
  std::map<std::string, Dataset> data;  // normalized, labels in all_phones
};

SyntheticWorld BuildWorld(const ExperimentConfig& config, std::uint64_t seed);

/// Re-indexes labels from one phone set into another by IPA symbol.
std::vector<Utterance> Reencode(const std::vector<Utterance>& utterances,
                                const UniversalPhoneSet& from, const UniversalPhoneSet& to);

/// Pooled LER with greedy decoding restricted to each utterance's language.
double EvaluateLer(const Model& model, const std::vector<Utterance>& utterances,
                   std::size_t threads = 1);

struct ExperimentReport {
  std::string name;
  std::string table;                // tab-separated results
  std::vector<std::string> checks;  // one line per trend check
  bool pass = false;
  double seconds = 0.0;

  std::string Format() const;
};

/// Holds per-seed worlds, seed models, and finished runs so several
/// experiments in one process share work.
class ExperimentContext {
 public:
  explicit ExperimentContext(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const SyntheticWorld& World(std::uint64_t seed);
  /// Multilingual model over L1-L3 (no LHUC).
  const Model& SourceModel(std::uint64_t seed, bool lhuc = false);
  /// Multilingual model over L1-L4.
  const Model& FourLanguageModel(std::uint64_t seed);

  /// Test LER of a target-language run, memoized by its parameters.
  /// strategy is "scratch" or an adaptation strategy name.
  double TargetRun(std::uint64_t seed, const std::string& target, const std::string& seed_model,
                   const std::string& strategy, double fraction, bool dropout);

  double MonoRun(std::uint64_t seed, const std::string& language);

 private:
  void Log(const std::string& msg) const;
  Model TrainModel(Model model, const std::vector<Utterance>& train,
                   const std::vector<Utterance>& val, TrainConfig config, std::uint64_t seed);

  ExperimentConfig config_;
  std::map<std::uint64_t, SyntheticWorld> worlds_;
  std::map<std::string, Model> models_;
  std::map<std::string, double> runs_;
};

ExperimentReport RunTable1Trend(ExperimentContext& ctx);
ExperimentReport RunFig2Curve(ExperimentContext& ctx);
ExperimentReport RunTable2Coverage(ExperimentContext& ctx);
ExperimentReport RunTable3Dropout(ExperimentContext& ctx);

/// Names accepted by RunExperiment.
const std::vector<std::string>& ExperimentNames();
/// Throws DomainError for unknown names.
ExperimentReport RunExperiment(const std::string& name, ExperimentContext& ctx);

double Median(std::vector<double> values);

}  // namespace mlctc

#endif  // MLCTC_EXPERIMENTS_H_

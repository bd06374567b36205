// include/mlctc/training.h

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

#ifndef MLCTC_TRAINING_H_
#define MLCTC_TRAINING_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlctc/adaptation.h"
#include "mlctc/corpus.h"
#include "mlctc/network.h"

namespace mlctc {

struct TrainConfig {
  double learning_rate = 0.0004;
  double momentum = 0.9;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  double dropout_rate = 0.0;
  /// Turns on LHUC and registers every language seen in the data.
  bool lhuc_enabled = false;
  std::uint64_t seed = 0;
  std::optional<FreezeMask> freeze_mask;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
  /// Workers for per-utterance forward/backward. Results do not depend on it.
  std::size_t threads = 1;

  /// Throws DomainError on lr <= 0, momentum outside [0, 1), patience 0,
  /// batch_size 0, dropout outside [0, 1), negative clip_norm, threads 0.
  void Validate() const;
};

/// Structured-text (JSON) form with the TrainConfig keys. Missing keys keep
/// their defaults; unknown keys are a FormatError.
TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base = {});
std::string SerializeTrainConfig(const TrainConfig& config);

struct TrainState {
  Model model;
  Parameters velocity;
  std::size_t epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_best = 0;
  Rng rng{0};

  static TrainState Init(Model model, std::uint64_t seed);
};

struct EpochReport {
  std::size_t epoch = 0;
  double mean_train_loss = 0.0;
  double mean_val_loss = 0.0;
  std::size_t utterances_seen = 0;
  std::size_t infeasible_skipped = 0;
};

struct BatchResult {
  double mean_loss = 0.0;
  std::size_t feasible = 0;
  std::size_t skipped = 0;
};

/// v <- momentum * v - lr * g; theta <- theta + v. Frozen tensors are left
/// alone. Throws DivergedTrainingError naming the first non-finite tensor,
/// before anything is modified.
void SgdMomentumStep(TrainState& state, const Parameters& grads, const TrainConfig& config);

/// Per-utterance loss and parameter gradients, computed in parallel and
/// reduced in batch order. Infeasible utterances are skipped.
struct BatchGradients {
  Parameters grads;  // mean over feasible utterances
  BatchResult result;
};
BatchGradients ComputeBatchGradients(const Model& model, std::span<const Utterance> batch,
                                     const std::vector<DropoutPlan>* plans,
                                     std::size_t threads);

/// One optimizer step on the mean gradient of the batch. Draws the dropout
/// mode and masks from state.rng when dropout_rate > 0. Throws EmptyBatchError
/// when no utterance is feasible.
BatchResult TrainMinibatch(TrainState& state, std::span<const Utterance> batch,
                           const TrainConfig& config);

struct EvalResult {
  double mean_loss = 0.0;
  std::size_t feasible = 0;
  std::size_t skipped = 0;
};

/// Mean -ln P over feasible utterances, no dropout. Throws EmptyBatchError
/// when nothing is feasible.
EvalResult EvaluateMeanLoss(const Model& model, std::span<const Utterance> utterances,
                            std::size_t threads = 1);

/// Best-so-far tracker; an epoch improves when its loss is strictly lower.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  /// Returns true when loss is a new best.
  bool Update(double loss);
  bool ShouldStop() const { return since_best_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t since_best_ = 0;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
};

struct TrainingCallbacks {
  std::function<void(const EpochReport&)> on_epoch;
  std::function<void(const EpochReport&, const Model&)> on_improvement;
};

struct TrainingResult {
  Model best_model;
  std::vector<EpochReport> reports;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double initial_val_loss = 0.0;
};

/// Shuffled minibatch epochs with early stopping on validation loss. Returns
/// the model from the best validation epoch.
TrainingResult RunTraining(Model model, std::span<const Utterance> train,
                           std::span<const Utterance> val, const TrainConfig& config,
                           const TrainingCallbacks& callbacks = {});

/// Tab-separated epoch line: epoch, train loss, val loss, skipped, wall time.
std::string FormatEpochLine(const EpochReport& report, const std::string& wall_time);

}  // namespace mlctc

#endif  // MLCTC_TRAINING_H_

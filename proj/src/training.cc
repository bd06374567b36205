// src/training.cc

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

#include "mlctc/training.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"
#include "mlctc/ctc.h"
#include "mlctc/errors.h"

namespace mlctc {

namespace {

std::vector<Matrix*> Tensors(Parameters& p) {
  std::vector<Matrix*> out;
  p.ForEachTensor([&out](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::vector<const Matrix*> Tensors(const Parameters& p) {
  std::vector<const Matrix*> out;
  p.ForEachTensor([&out](const std::string&, const Matrix& m) { out.push_back(&m); });
  return out;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// (lowest index) is rethrown.
void ParallelFor(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) guarded(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct UtteranceOutcome {
  bool feasible = false;
  double loss = 0.0;
  Parameters grads;
};

bool Feasible(const Utterance& u) {
  return !u.labels.empty() && u.features.rows() >= MinFramesRequired(u.labels);
}

void EnableLhuc(Model& model, std::span<const Utterance> a, std::span<const Utterance> b) {
  model.config.lhuc = true;
  for (auto set : {a, b})
    for (const auto& u : set) RegisterLhucLanguage(model, u.language_id);
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must be in [0, 1)");
  if (patience == 0) throw DomainError("patience must be at least 1");
  if (batch_size == 0) throw DomainError("batch_size must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw DomainError("dropout_rate must be in [0, 1)");
  if (!(clip_norm >= 0.0)) throw DomainError("clip_norm must be non-negative");
  if (threads == 0) throw DomainError("threads must be at least 1");
}

TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("train config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") base.learning_rate = value.get<double>();
      else if (key == "momentum") base.momentum = value.get<double>();
      else if (key == "batch_size") base.batch_size = value.get<std::size_t>();
      else if (key == "max_epochs") base.max_epochs = value.get<std::size_t>();
      else if (key == "patience") base.patience = value.get<std::size_t>();
      else if (key == "dropout_rate") base.dropout_rate = value.get<double>();
      else if (key == "lhuc_enabled") base.lhuc_enabled = value.get<bool>();
      else if (key == "seed") base.seed = value.get<std::uint64_t>();
      else if (key == "clip_norm") base.clip_norm = value.get<double>();
      else if (key == "threads") base.threads = value.get<std::size_t>();
      else if (key == "freeze_mask") base.freeze_mask = value.get<FreezeMask>();
      else throw FormatError("train config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train config: ") + e.what());
  }
  return base;
}

std::string SerializeTrainConfig(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["dropout_rate"] = c.dropout_rate;
  j["lhuc_enabled"] = c.lhuc_enabled;
  j["seed"] = c.seed;
  j["clip_norm"] = c.clip_norm;
  j["threads"] = c.threads;
  if (c.freeze_mask) j["freeze_mask"] = *c.freeze_mask;
  return j.dump(2) + "\n";
}

TrainState TrainState::Init(Model model, std::uint64_t seed) {
  TrainState s;
  s.velocity = model.params.ZerosLike();
  s.model = std::move(model);
  s.rng = Rng(seed);
  return s;
}

void SgdMomentumStep(TrainState& state, const Parameters& grads, const TrainConfig& config) {
  const auto names = state.model.params.TensorNames();
  auto theta = Tensors(state.model.params);
  auto vel = Tensors(state.velocity);
  const auto g = Tensors(grads);
  if (g.size() != theta.size() || vel.size() != theta.size())
    throw ShapeError("gradient layout does not match the model");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g[k]->SameShape(*theta[k]) || !vel[k]->SameShape(*theta[k]))
      throw ShapeError("gradient for '" + names[k] + "' has the wrong shape");
    if (!g[k]->AllFinite()) throw DivergedTrainingError("non-finite gradient in '" + names[k] + "'");
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (config.freeze_mask) {
      auto it = config.freeze_mask->find(names[k]);
      if (it == config.freeze_mask->end())
        throw ShapeError("freeze mask has no entry for '" + names[k] + "'");
      if (it->second) continue;
    }
    auto v = vel[k]->values();
    auto p = theta[k]->values();
    const auto gv = g[k]->values();
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = config.momentum * v[i] - config.learning_rate * gv[i];
      p[i] += v[i];
    }
    if (!theta[k]->AllFinite())
      throw DivergedTrainingError("parameters of '" + names[k] + "' became non-finite");
  }
}

BatchGradients ComputeBatchGradients(const Model& model, std::span<const Utterance> batch,
                                     const std::vector<DropoutPlan>* plans,
                                     std::size_t threads) {
  if (batch.empty()) throw EmptyBatchError("empty minibatch");
  std::vector<UtteranceOutcome> outcomes(batch.size());
  ParallelFor(batch.size(), threads, [&](std::size_t i) {
    const Utterance& u = batch[i];
    if (!Feasible(u)) return;
    const DropoutPlan* plan = plans ? &(*plans)[i] : nullptr;
    ForwardResult fwd = NetworkForward(u.features, model, u.language_id, plan);
    CtcResult ctc = CtcGrad({std::move(fwd.log_probs), u.labels});
    outcomes[i].feasible = true;
    outcomes[i].loss = -ctc.log_likelihood;
    outcomes[i].grads = NetworkBackward(model, fwd.cache, ctc.grad_logits);
  });
  BatchGradients out;
  out.grads = model.params.ZerosLike();
  double loss_sum = 0.0;
  for (auto& o : outcomes) {
    if (!o.feasible) {
      ++out.result.skipped;
      continue;
    }
    ++out.result.feasible;
    loss_sum += o.loss;
    out.grads.Accumulate(o.grads);
  }
  if (out.result.feasible == 0)
    throw EmptyBatchError("every utterance in the minibatch is infeasible");
  const double n = static_cast<double>(out.result.feasible);
  out.grads.Scale(1.0 / n);
  out.result.mean_loss = loss_sum / n;
  return out;
}

BatchResult TrainMinibatch(TrainState& state, std::span<const Utterance> batch,
                           const TrainConfig& config) {
  if (batch.empty()) throw EmptyBatchError("empty minibatch");
  std::vector<DropoutPlan> plans;
  if (config.dropout_rate > 0.0)
    plans = SampleMinibatchDropout(config.dropout_rate, state.model.config, batch.size(),
                                   state.rng);
  BatchGradients bg = ComputeBatchGradients(
      state.model, batch, config.dropout_rate > 0.0 ? &plans : nullptr, config.threads);
  if (config.freeze_mask) ApplyFreeze(bg.grads, *config.freeze_mask);
  if (config.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Matrix* m : Tensors(std::as_const(bg.grads)))
      for (double v : m->values()) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > config.clip_norm) bg.grads.Scale(config.clip_norm / norm);
  }
  SgdMomentumStep(state, bg.grads, config);
  return bg.result;
}

EvalResult EvaluateMeanLoss(const Model& model, std::span<const Utterance> utterances,
                            std::size_t threads) {
  std::vector<double> losses(utterances.size(), std::numeric_limits<double>::quiet_NaN());
  ParallelFor(utterances.size(), threads, [&](std::size_t i) {
    const Utterance& u = utterances[i];
    if (!Feasible(u)) return;
    const ForwardResult fwd = NetworkForward(u.features, model, u.language_id);
    losses[i] = -CtcLogLikelihood({fwd.log_probs, u.labels});
  });
  EvalResult out;
  double sum = 0.0;
  for (double l : losses) {
    if (std::isnan(l)) {
      ++out.skipped;
      continue;
    }
    ++out.feasible;
    sum += l;
  }
  if (out.feasible == 0) throw EmptyBatchError("no feasible utterance to evaluate");
  out.mean_loss = sum / static_cast<double>(out.feasible);
  return out;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw DomainError("patience must be at least 1");
}

bool EarlyStopping::Update(double loss) {
  ++epochs_;
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epochs_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

TrainingResult RunTraining(Model model, std::span<const Utterance> train,
                           std::span<const Utterance> val, const TrainConfig& config,
                           const TrainingCallbacks& callbacks) {
  config.Validate();
  if (train.empty() || val.empty()) throw EmptyBatchError("training needs train and val data");
  if (config.lhuc_enabled) EnableLhuc(model, train, val);
  model.Validate();

  TrainingResult result;
  result.initial_val_loss = EvaluateMeanLoss(model, val, config.threads).mean_loss;
  result.best_model = model;
  TrainState state = TrainState::Init(std::move(model), config.seed);
  EarlyStopping stopper(config.patience);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Utterance> batch;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    state.rng.Shuffle(order);
    EpochReport report;
    report.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t feasible = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i)
        batch.push_back(train[order[i]]);
      const BatchResult br = TrainMinibatch(state, batch, config);
      loss_sum += br.mean_loss * static_cast<double>(br.feasible);
      feasible += br.feasible;
      report.infeasible_skipped += br.skipped;
      report.utterances_seen += batch.size();
    }
    report.mean_train_loss = loss_sum / static_cast<double>(feasible);
    const EvalResult ev = EvaluateMeanLoss(state.model, val, config.threads);
    report.mean_val_loss = ev.mean_loss;
    if (!std::isfinite(report.mean_train_loss) || !std::isfinite(report.mean_val_loss))
      throw DivergedTrainingError("epoch " + std::to_string(epoch) + " produced a non-finite loss");
    state.epoch = epoch;
    result.reports.push_back(report);
    if (callbacks.on_epoch) callbacks.on_epoch(report);
    if (stopper.Update(report.mean_val_loss)) {
      result.best_model = state.model;
      result.best_epoch = epoch;
      if (callbacks.on_improvement) callbacks.on_improvement(report, state.model);
    }
    state.best_val_loss = stopper.best();
    state.epochs_since_best = epoch - stopper.best_epoch();
    if (stopper.ShouldStop()) break;
  }
  return result;
}

std::string FormatEpochLine(const EpochReport& r, const std::string& wall_time) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%zu\t%s\n", r.epoch, r.mean_train_loss,
                r.mean_val_loss, r.infeasible_skipped, wall_time.c_str());
  return buf;
}

}  // namespace mlctc

// src/adaptation.cc

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

#include "mlctc/adaptation.h"

#include <set>

#include "json.hpp"
#include "mlctc/errors.h"
#include "mlctc/io.h"

namespace mlctc {

namespace {

Model CopyHidden(const Model& source, const UniversalPhoneSet& target_set,
                 const AdaptationOptions& options) {
  source.Validate();
  if (target_set.size() < 2) throw DomainError("target phone set needs blank plus one phone");
  Model out;
  out.config = source.config;
  out.config.lhuc = !options.target_lhuc_language.empty();
  out.params.layers = source.params.layers;
  out.phones = target_set;
  out.phoneset_version = target_set.version();
  out.init_seed = source.init_seed;
  const std::size_t H = source.config.hidden_size;
  out.params.output = {Matrix(target_set.size(), 2 * H), Matrix(target_set.size(), 1)};
  if (out.config.lhuc) RegisterLhucLanguage(out, options.target_lhuc_language);
  return out;
}

}  // namespace

const char* StrategyName(AdaptationStrategy strategy) {
  switch (strategy) {
    case AdaptationStrategy::kReplaceFrozen: return "replace-frozen";
    case AdaptationStrategy::kReplaceAll: return "replace-all";
    case AdaptationStrategy::kExtendAll: return "extend-all";
  }
  return "?";
}

AdaptationStrategy ParseStrategy(const std::string& name) {
  for (auto s : {AdaptationStrategy::kReplaceFrozen, AdaptationStrategy::kReplaceAll,
                 AdaptationStrategy::kExtendAll})
    if (name == StrategyName(s)) return s;
  throw DomainError("unknown adaptation strategy '" + name + "'");
}

FreezeMask MakeFreezeMask(const Parameters& params, AdaptationStrategy strategy) {
  FreezeMask mask;
  for (const auto& name : params.TensorNames())
    mask[name] = strategy == AdaptationStrategy::kReplaceFrozen && name.rfind("output.", 0) != 0;
  return mask;
}

AdaptedModel ReplaceOutputLayer(const Model& source, const UniversalPhoneSet& target_set,
                                bool freeze_hidden, Rng& rng,
                                const AdaptationOptions& options) {
  AdaptedModel out;
  out.model = CopyHidden(source, target_set, options);
  InitUniform(out.model.params.output.W, rng);
  out.plan.strategy =
      freeze_hidden ? AdaptationStrategy::kReplaceFrozen : AdaptationStrategy::kReplaceAll;
  out.plan.freeze_mask = MakeFreezeMask(out.model.params, out.plan.strategy);
  out.provenance = Sha256Hex(SerializeCheckpoint(source));
  out.model.Validate();
  return out;
}

AdaptedModel ExtendOutputLayer(const Model& source, const UniversalPhoneSet& source_set,
                               const UniversalPhoneSet& extended_set,
                               const std::vector<std::size_t>& index_map, Rng& rng,
                               const AdaptationOptions& options) {
  if (source.phoneset_version != source_set.version() || !(source.phones == source_set))
    throw StaleModelError("source model is bound to phone-set version " +
                          std::to_string(source.phoneset_version) + ", not version " +
                          std::to_string(source_set.version()));
  if (index_map.size() != source_set.size())
    throw ShapeError("index map has " + std::to_string(index_map.size()) +
                     " entries for " + std::to_string(source_set.size()) + " symbols");
  std::set<std::size_t> targets;
  for (std::size_t i = 0; i < index_map.size(); ++i) {
    if (index_map[i] >= extended_set.size() ||
        extended_set.symbol(index_map[i]) != source_set.symbol(i))
      throw DomainError("index map sends '" + source_set.symbol(i) + "' to the wrong row");
    if (!targets.insert(index_map[i]).second) throw DomainError("index map is not injective");
  }

  AdaptedModel out;
  out.model = CopyHidden(source, extended_set, options);
  OutputLayerParams& dst = out.model.params.output;
  const OutputLayerParams& src = source.params.output;
  for (std::size_t row = 0; row < extended_set.size(); ++row) {
    if (targets.count(row)) continue;
    for (double& v : dst.W.row(row)) v = rng.Uniform(-0.1, 0.1);
  }
  for (std::size_t i = 0; i < index_map.size(); ++i) {
    auto from = src.W.row(i);
    std::copy(from.begin(), from.end(), dst.W.row(index_map[i]).begin());
    dst.b(index_map[i], 0) = src.b(i, 0);
  }
  out.plan.strategy = AdaptationStrategy::kExtendAll;
  out.plan.freeze_mask = MakeFreezeMask(out.model.params, out.plan.strategy);
  out.plan.output_index_map = index_map;
  out.provenance = Sha256Hex(SerializeCheckpoint(source));
  out.model.Validate();
  return out;
}

void ApplyFreeze(Parameters& grads, const FreezeMask& mask) {
  std::size_t seen = 0;
  grads.ForEachTensor([&](const std::string& name, Matrix& m) {
    auto it = mask.find(name);
    if (it == mask.end()) throw ShapeError("freeze mask has no entry for '" + name + "'");
    ++seen;
    if (it->second) m.Fill(0.0);
  });
  if (seen != mask.size())
    throw ShapeError("freeze mask names tensors the model does not have");
}

std::string AdaptationManifest(const AdaptedModel& adapted,
                               std::uint64_t source_phoneset_version) {
  nlohmann::ordered_json j;
  j["strategy"] = StrategyName(adapted.plan.strategy);
  j["source_checkpoint_sha256"] = adapted.provenance;
  j["source_phoneset_version"] = source_phoneset_version;
  j["target_phoneset_version"] = adapted.model.phoneset_version;
  j["output_index_map"] = adapted.plan.output_index_map;
  nlohmann::ordered_json frozen = nlohmann::ordered_json::array();
  for (const auto& [name, f] : adapted.plan.freeze_mask)
    if (f) frozen.push_back(name);
  j["frozen_tensors"] = frozen;
  j["lhuc_languages"] = nlohmann::ordered_json::array();
  for (const auto& [lang, _] : adapted.model.params.lhuc) j["lhuc_languages"].push_back(lang);
  return j.dump(2) + "\n";
}

}  // namespace mlctc

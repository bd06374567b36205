// include/mlctc/adaptation.h

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

#ifndef MLCTC_ADAPTATION_H_
#define MLCTC_ADAPTATION_H_

#include <map>
#include <string>
#include <vector>

#include "mlctc/network.h"
#include "mlctc/phoneset.h"

namespace mlctc {

enum class AdaptationStrategy { kReplaceFrozen, kReplaceAll, kExtendAll };

/// "replace-frozen", "replace-all", "extend-all".
const char* StrategyName(AdaptationStrategy strategy);
AdaptationStrategy ParseStrategy(const std::string& name);

/// Tensor name -> frozen. Frozen tensors receive no updates.
using FreezeMask = std::map<std::string, bool>;

struct AdaptationPlan {
  AdaptationStrategy strategy = AdaptationStrategy::kReplaceAll;
  FreezeMask freeze_mask;
  /// output_index_map[old row] = new row. Empty unless kExtendAll.
  std::vector<std::size_t> output_index_map;
};

struct AdaptedModel {
  Model model;
  AdaptationPlan plan;
  /// SHA-256 of the source checkpoint bytes.
  std::string provenance;
};

struct AdaptationOptions {
  /// When non-empty, the adapted model gets a fresh r = 0 LHUC vector set for
  /// this language. Source LHUC vectors are always dropped.
  std::string target_lhuc_language;
};

/// Everything frozen except output.W and output.b for kReplaceFrozen;
/// nothing frozen otherwise.
FreezeMask MakeFreezeMask(const Parameters& params, AdaptationStrategy strategy);

/// New randomly initialized output layer sized to target_set; hidden layers
/// copied.
AdaptedModel ReplaceOutputLayer(const Model& source, const UniversalPhoneSet& target_set,
                                bool freeze_hidden, Rng& rng,
                                const AdaptationOptions& options = {});

/// Old output rows (blank included) copied through index_map, rows for new
/// symbols randomly initialized with zero bias. Throws StaleModelError when
/// source is not bound to source_set.
AdaptedModel ExtendOutputLayer(const Model& source, const UniversalPhoneSet& source_set,
                               const UniversalPhoneSet& extended_set,
                               const std::vector<std::size_t>& index_map, Rng& rng,
                               const AdaptationOptions& options = {});

/// Zeroes gradients of frozen tensors. Throws ShapeError unless the mask
/// names exactly the tensors of grads.
void ApplyFreeze(Parameters& grads, const FreezeMask& mask);

/// Structured-text provenance record written next to an adapted checkpoint.
std::string AdaptationManifest(const AdaptedModel& adapted,
                               std::uint64_t source_phoneset_version);

}  // namespace mlctc

#endif  // MLCTC_ADAPTATION_H_

// include/mlctc/corpus.h

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

#ifndef MLCTC_CORPUS_H_
#define MLCTC_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mlctc/numerics.h"
#include "mlctc/phoneset.h"

namespace mlctc {

enum class Split { kTrain, kVal, kTest };

const char* SplitName(Split split);
/// Throws FormatError for anything but "train", "val", "test".
Split ParseSplit(const std::string& name);

struct Utterance {
  std::string id;
  Matrix features;  // T x F
  LabelSequence labels;
  std::string language_id;
  std::string speaker_id;
  Split split = Split::kTrain;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

/// Utterances of one or more languages. Speakers never straddle splits.
struct Dataset {
  std::vector<Utterance> utterances;

  std::vector<Utterance> Select(Split split) const;
  std::vector<Utterance> Select(Split split, const std::string& language_id) const;
  /// Throws DomainError if a speaker appears in two splits.
  void CheckSpeakerDisjoint() const;
  void Append(const Dataset& other);

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CountRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

struct SyntheticLanguageSpec {
  LanguagePhoneMap phones;
  std::size_t utterance_count = 200;
  CountRange phones_per_utterance{3, 6};
  CountRange frames_per_phone{2, 4};
  /// Std of the language-specific offset added to every phone prototype.
  double accent_offset_scale = 0.5;
  double speaker_offset_scale = 0.3;
  double noise_std = 0.5;
  std::size_t speaker_count = 10;
  /// The last test_speakers speakers form the test split, the val_speakers
  /// before them the validation split, the rest train.
  std::size_t val_speakers = 2;
  std::size_t test_speakers = 2;

  /// Throws DomainError on empty ranges, negative scales, or too few speakers.
  void Validate() const;
};

/// Symbol -> prototype mean. One entry per non-blank symbol, so a phone
/// shared by several languages has a single prototype.
struct PhonePrototypeBank {
  std::map<std::string, std::vector<double>> prototypes;
  std::size_t feature_dim = 0;

  const std::vector<double>& at(const std::string& ipa) const;
};

/// Gaussian prototypes, each resampled until it is at least min_distance
/// from every earlier one. Throws GenerationError after 1000 failed attempts
/// for one symbol.
PhonePrototypeBank BuildPrototypeBank(const UniversalPhoneSet& universal,
                                      std::size_t feature_dim, Rng& rng,
                                      double min_distance = 1.0);

/// Frames of phone s in language l: prototype[s] + accent[l][s] + speaker
/// offset + iid noise. Consecutive phones of an utterance always differ.
Dataset GenerateLanguage(const SyntheticLanguageSpec& spec, const PhonePrototypeBank& bank,
                         const UniversalPhoneSet& universal, Rng& rng);

/// Per speaker and feature dimension: subtract the mean, divide by the
/// standard deviation (floored at 1e-8), both over all of the speaker's frames.
Dataset NormalizePerSpeaker(const Dataset& dataset);

/// Speaker-stratified subset of ceil(fraction * N) utterances, taken as a
/// prefix of one seeded permutation so smaller fractions nest inside larger
/// ones. Throws DomainError unless fraction is in (0, 1].
std::vector<Utterance> SubsetHours(const std::vector<Utterance>& utterances,
                                   double fraction, Rng& rng);

// On-disk layout of a dataset directory:
//   phones.txt     phone-set file
//   features.bin   records of (id, language, speaker, T, F) headers followed
//                  by T*F little-endian float64 values
//   manifest.tsv   id <TAB> byte offset <TAB> language <TAB> speaker <TAB>
//                  split <TAB> space-separated IPA labels
void SaveDataset(const std::string& dir, const Dataset& dataset,
                 const UniversalPhoneSet& universal);

struct LoadedDataset {
  Dataset dataset;
  UniversalPhoneSet phones;
};
LoadedDataset LoadDataset(const std::string& dir);

}  // namespace mlctc

#endif  // MLCTC_CORPUS_H_

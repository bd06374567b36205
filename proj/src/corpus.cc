// src/corpus.cc

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

#include "mlctc/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "mlctc/ctc.h"
#include "mlctc/errors.h"
#include "mlctc/io.h"

namespace mlctc {

namespace {

void PutU32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out += static_cast<char>((v >> (8 * b)) & 0xff);
}

void PutString(std::string& out, const std::string& s) {
  PutU32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  std::uint32_t U32() {
    auto b = Take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::string String() { return std::string(Take(U32())); }
  std::string_view Take(std::size_t n) {
    if (pos_ > bytes_.size() || bytes_.size() - pos_ < n)
      throw FormatError("feature container truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_;
};

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<std::string> SplitSpaces(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split '" + name + "'");
}

std::vector<Utterance> Dataset::Select(Split split) const {
  std::vector<Utterance> out;
  for (const auto& u : utterances)
    if (u.split == split) out.push_back(u);
  return out;
}

std::vector<Utterance> Dataset::Select(Split split, const std::string& language_id) const {
  std::vector<Utterance> out;
  for (const auto& u : utterances)
    if (u.split == split && u.language_id == language_id) out.push_back(u);
  return out;
}

void Dataset::CheckSpeakerDisjoint() const {
  std::map<std::string, Split> seen;
  for (const auto& u : utterances) {
    auto [it, inserted] = seen.emplace(u.speaker_id, u.split);
    if (!inserted && it->second != u.split)
      throw DomainError("speaker '" + u.speaker_id + "' appears in two splits");
  }
}

void Dataset::Append(const Dataset& other) {
  utterances.insert(utterances.end(), other.utterances.begin(), other.utterances.end());
}

void SyntheticLanguageSpec::Validate() const {
  phones.Validate();
  auto check = [](const CountRange& r, const char* what) {
    if (r.lo == 0 || r.hi < r.lo)
      throw DomainError(std::string(what) + " range must satisfy 1 <= lo <= hi");
  };
  check(phones_per_utterance, "phones_per_utterance");
  check(frames_per_phone, "frames_per_phone");
  if (noise_std < 0 || accent_offset_scale < 0 || speaker_offset_scale < 0)
    throw DomainError("noise and offset scales must be non-negative");
  if (speaker_count == 0 || val_speakers + test_speakers >= speaker_count)
    throw DomainError("need at least one training speaker");
  if (utterance_count < speaker_count)
    throw DomainError("every speaker needs at least one utterance");
  if (phones.phones.size() < 2 && phones_per_utterance.hi > 1)
    throw DomainError("a single-phone language cannot form multi-phone utterances");
}

const std::vector<double>& PhonePrototypeBank::at(const std::string& ipa) const {
  auto it = prototypes.find(ipa);
  if (it == prototypes.end()) throw LookupError("no prototype for phone '" + ipa + "'");
  return it->second;
}

PhonePrototypeBank BuildPrototypeBank(const UniversalPhoneSet& universal,
                                      std::size_t feature_dim, Rng& rng,
                                      double min_distance) {
  if (feature_dim < 2) throw DomainError("feature_dim must be at least 2");
  PhonePrototypeBank bank;
  bank.feature_dim = feature_dim;
  std::vector<const std::vector<double>*> placed;
  for (std::size_t s = 1; s < universal.size(); ++s) {
    std::vector<double> candidate(feature_dim);
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      for (double& v : candidate) v = rng.Gaussian(0.0, 1.0);
      ok = std::all_of(placed.begin(), placed.end(), [&](const std::vector<double>* p) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < feature_dim; ++k)
          d2 += (candidate[k] - (*p)[k]) * (candidate[k] - (*p)[k]);
        return std::sqrt(d2) >= min_distance;
      });
    }
    if (!ok)
      throw GenerationError("cannot place prototype for '" + universal.symbol(s) +
                            "' at distance " + std::to_string(min_distance));
    auto [it, _] = bank.prototypes.emplace(universal.symbol(s), std::move(candidate));
    placed.push_back(&it->second);
  }
  return bank;
}

Dataset GenerateLanguage(const SyntheticLanguageSpec& spec, const PhonePrototypeBank& bank,
                         const UniversalPhoneSet& universal, Rng& rng) {
  spec.Validate();
  const std::string& lang = spec.phones.language_id;
  const std::size_t F = bank.feature_dim;
  const std::size_t n_phones = spec.phones.phones.size();

  // Language-specific acoustics: one fixed offset per phone of this language.
  std::vector<std::vector<double>> means(n_phones);
  for (std::size_t p = 0; p < n_phones; ++p) {
    means[p] = bank.at(spec.phones.phones[p].ipa());
    for (double& v : means[p]) v += rng.Gaussian(0.0, spec.accent_offset_scale);
  }
  std::vector<std::vector<double>> speaker_offsets(spec.speaker_count);
  for (auto& off : speaker_offsets) {
    off.resize(F);
    for (double& v : off) v = rng.Gaussian(0.0, spec.speaker_offset_scale);
  }
  const std::size_t first_val = spec.speaker_count - spec.val_speakers - spec.test_speakers;
  const std::size_t first_test = spec.speaker_count - spec.test_speakers;

  auto draw = [&rng](const CountRange& r) { return r.lo + rng.Below(r.hi - r.lo + 1); };

  Dataset out;
  for (std::size_t n = 0; n < spec.utterance_count; ++n) {
    const std::size_t speaker = n % spec.speaker_count;
    const std::size_t length = draw(spec.phones_per_utterance);
    std::vector<std::size_t> seq;
    for (std::size_t i = 0; i < length; ++i) {
      std::size_t p;
      do {
        p = rng.Below(n_phones);
      } while (!seq.empty() && p == seq.back());
      seq.push_back(p);
    }
    std::vector<std::size_t> durations;
    std::size_t T = 0;
    for (std::size_t i = 0; i < length; ++i) {
      durations.push_back(draw(spec.frames_per_phone));
      T += durations.back();
    }
    Utterance u;
    std::ostringstream id;
    id << lang << '-' << std::string(5 - std::min<std::size_t>(5, std::to_string(n).size()), '0')
       << n;
    u.id = id.str();
    u.language_id = lang;
    u.speaker_id = lang + "-s" + std::to_string(speaker);
    u.split = speaker >= first_test ? Split::kTest
              : speaker >= first_val ? Split::kVal
                                     : Split::kTrain;
    u.features = Matrix(T, F);
    std::vector<std::string> ipa;
    std::size_t t = 0;
    for (std::size_t i = 0; i < length; ++i) {
      ipa.push_back(spec.phones.phones[seq[i]].ipa());
      for (std::size_t d = 0; d < durations[i]; ++d, ++t)
        for (std::size_t k = 0; k < F; ++k)
          u.features(t, k) = means[seq[i]][k] + speaker_offsets[speaker][k] +
                             rng.Gaussian(0.0, spec.noise_std);
    }
    u.labels = EncodeLabels(universal, lang, ipa);
    out.utterances.push_back(std::move(u));
  }
  return out;
}

Dataset NormalizePerSpeaker(const Dataset& dataset) {
  struct Stats {
    std::vector<double> sum, sq;
    std::size_t frames = 0;
  };
  std::map<std::string, Stats> stats;
  for (const auto& u : dataset.utterances) {
    Stats& s = stats[u.speaker_id];
    const std::size_t F = u.features.cols();
    if (s.sum.empty()) {
      s.sum.assign(F, 0.0);
      s.sq.assign(F, 0.0);
    } else if (s.sum.size() != F) {
      throw ShapeError("speaker '" + u.speaker_id + "' has inconsistent feature dims");
    }
    for (std::size_t t = 0; t < u.features.rows(); ++t)
      for (std::size_t k = 0; k < F; ++k) s.sum[k] += u.features(t, k);
    s.frames += u.features.rows();
  }
  std::map<std::string, std::vector<double>> means;
  for (auto& [spk, s] : stats) {
    auto& m = means[spk];
    m.resize(s.sum.size());
    for (std::size_t k = 0; k < m.size(); ++k)
      m[k] = s.frames ? s.sum[k] / static_cast<double>(s.frames) : 0.0;
  }
  // Second pass for the variance about the mean; avoids cancellation.
  for (const auto& u : dataset.utterances) {
    Stats& s = stats[u.speaker_id];
    const auto& m = means[u.speaker_id];
    for (std::size_t t = 0; t < u.features.rows(); ++t)
      for (std::size_t k = 0; k < m.size(); ++k) {
        const double d = u.features(t, k) - m[k];
        s.sq[k] += d * d;
      }
  }
  Dataset out = dataset;
  for (auto& u : out.utterances) {
    const Stats& s = stats[u.speaker_id];
    const auto& m = means[u.speaker_id];
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double sd = s.frames ? std::sqrt(s.sq[k] / static_cast<double>(s.frames)) : 0.0;
      const double denom = std::max(sd, 1e-8);
      for (std::size_t t = 0; t < u.features.rows(); ++t)
        u.features(t, k) = (u.features(t, k) - m[k]) / denom;
    }
  }
  return out;
}

std::vector<Utterance> SubsetHours(const std::vector<Utterance>& utterances,
                                   double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw DomainError("subset fraction " + std::to_string(fraction) + " outside (0, 1]");
  // Speakers in order of first appearance, each with a shuffled utterance list.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    auto [it, inserted] = by_speaker.try_emplace(utterances[i].speaker_id);
    if (inserted) order.push_back(utterances[i].speaker_id);
    it->second.push_back(i);
  }
  for (const auto& spk : order) rng.Shuffle(by_speaker[spk]);
  std::vector<std::size_t> permutation;
  for (std::size_t round = 0; permutation.size() < utterances.size(); ++round)
    for (const auto& spk : order)
      if (round < by_speaker[spk].size()) permutation.push_back(by_speaker[spk][round]);

  // The epsilon keeps products like 0.07 * 100 from rounding up to 8.
  const double exact = fraction * static_cast<double>(utterances.size());
  const std::size_t count =
      std::min(utterances.size(), static_cast<std::size_t>(std::ceil(exact - 1e-9)));
  std::vector<std::size_t> chosen(permutation.begin(),
                                  permutation.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());
  std::vector<Utterance> out;
  out.reserve(count);
  for (std::size_t i : chosen) out.push_back(utterances[i]);
  return out;
}

void SaveDataset(const std::string& dir, const Dataset& dataset,
                 const UniversalPhoneSet& universal) {
  std::filesystem::create_directories(dir);
  std::string container;
  std::ostringstream manifest;
  for (const auto& u : dataset.utterances) {
    const std::size_t offset = container.size();
    PutString(container, u.id);
    PutString(container, u.language_id);
    PutString(container, u.speaker_id);
    PutU32(container, static_cast<std::uint32_t>(u.features.rows()));
    PutU32(container, static_cast<std::uint32_t>(u.features.cols()));
    container += EncodeLittleEndian(u.features.values());
    manifest << u.id << '\t' << offset << '\t' << u.language_id << '\t' << u.speaker_id
             << '\t' << SplitName(u.split) << '\t';
    const auto ipa = DecodeLabels(universal, u.labels);
    for (std::size_t i = 0; i < ipa.size(); ++i) manifest << (i ? " " : "") << ipa[i];
    manifest << '\n';
  }
  WriteFile(dir + "/phones.txt", universal.Serialize());
  WriteFile(dir + "/features.bin", container);
  WriteFile(dir + "/manifest.tsv", manifest.str());
}

LoadedDataset LoadDataset(const std::string& dir) {
  LoadedDataset out;
  out.phones = UniversalPhoneSet::Parse(ReadFile(dir + "/phones.txt"));
  const std::string container = ReadFile(dir + "/features.bin");
  std::istringstream manifest(ReadFile(dir + "/manifest.tsv"));
  std::set<std::string> ids;
  for (std::string line; std::getline(manifest, line);) {
    if (line.empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 6)
      throw FormatError("manifest line has " + std::to_string(fields.size()) +
                        " fields: '" + line + "'");
    Utterance u;
    u.id = fields[0];
    if (!ids.insert(u.id).second) throw FormatError("duplicate utterance id '" + u.id + "'");
    std::size_t offset = 0;
    try {
      offset = std::stoull(fields[1]);
    } catch (const std::exception&) {
      throw FormatError("bad offset in manifest line '" + line + "'");
    }
    u.language_id = fields[2];
    u.speaker_id = fields[3];
    u.split = ParseSplit(fields[4]);
    ByteReader in(container, offset);
    if (in.String() != u.id || in.String() != u.language_id || in.String() != u.speaker_id)
      throw FormatError("container record at offset " + fields[1] +
                        " does not match manifest entry '" + u.id + "'");
    const std::size_t T = in.U32();
    const std::size_t F = in.U32();
    u.features = Matrix(T, F, DecodeLittleEndian(in.Take(T * F * 8)));
    const auto ipa = SplitSpaces(fields[5]);
    u.labels = EncodeLabels(out.phones, u.language_id, ipa);
    out.dataset.utterances.push_back(std::move(u));
  }
  out.dataset.CheckSpeakerDisjoint();
  return out;
}

}  // namespace mlctc

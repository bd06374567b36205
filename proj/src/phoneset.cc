// src/phoneset.cc

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

#include "mlctc/phoneset.h"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "mlctc/errors.h"

namespace mlctc {

namespace {

bool HasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  });
}

void CheckLanguageId(std::string_view id) {
  if (id.empty() || HasWhitespace(id))
    throw DomainError("invalid language id '" + std::string(id) + "'");
}

std::vector<std::string_view> SplitWords(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::string NormalizeNfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  // fromUTF8 substitutes U+FFFD for malformed input.
  if (in.indexOf(static_cast<UChar32>(0xFFFD)) >= 0 &&
      utf8.find("\xEF\xBF\xBD") == std::string_view::npos)
    throw DomainError("invalid UTF-8 in '" + std::string(utf8) + "'");
  const icu::UnicodeString out = nfc->normalize(in, status);
  if (U_FAILURE(status)) throw DomainError("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

PhoneSymbol::PhoneSymbol(std::string_view ipa) {
  if (ipa.empty()) throw DomainError("empty phone symbol");
  if (HasWhitespace(ipa))
    throw DomainError("phone symbol '" + std::string(ipa) + "' contains whitespace");
  ipa_ = NormalizeNfc(ipa);
  if (ipa_ == kBlankToken)
    throw DomainError("phone symbol may not be the blank token " +
                      std::string(kBlankToken));
}

LanguagePhoneMap LanguagePhoneMap::Make(std::string language_id,
                                        const std::vector<std::string>& phones) {
  LanguagePhoneMap map;
  map.language_id = std::move(language_id);
  for (const auto& p : phones) map.phones.emplace_back(p);
  map.Validate();
  return map;
}

void LanguagePhoneMap::Validate() const {
  CheckLanguageId(language_id);
  if (phones.empty())
    throw DomainError("language '" + language_id + "' has an empty inventory");
  std::set<PhoneSymbol> seen;
  for (const auto& p : phones)
    if (!seen.insert(p).second)
      throw DomainError("language '" + language_id + "' lists phone '" + p.ipa() +
                        "' twice");
}

std::optional<std::size_t> UniversalPhoneSet::IndexOf(std::string_view ipa) const {
  auto it = index_.find(ipa);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool UniversalPhoneSet::HasLanguage(std::string_view language_id) const {
  return per_language_.find(language_id) != per_language_.end();
}

std::vector<std::string> UniversalPhoneSet::languages() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : per_language_) out.push_back(id);
  return out;
}

const std::vector<std::size_t>& UniversalPhoneSet::LanguageIndices(
    std::string_view language_id) const {
  auto it = per_language_.find(language_id);
  if (it == per_language_.end())
    throw LookupError("unknown language '" + std::string(language_id) + "'");
  return it->second;
}

std::size_t UniversalPhoneSet::AddSymbol(const std::string& ipa) {
  auto [it, inserted] = index_.emplace(ipa, symbols_.size());
  if (inserted) symbols_.push_back(ipa);
  return it->second;
}

void UniversalPhoneSet::Register(const LanguagePhoneMap& map) {
  std::vector<std::size_t> indices{0};
  for (const auto& p : map.phones) indices.push_back(AddSymbol(p.ipa()));
  std::sort(indices.begin(), indices.end());
  per_language_[map.language_id] = std::move(indices);
}

void UniversalPhoneSet::CheckInvariants() const {
  if (symbols_.empty() || symbols_[0] != kBlankToken)
    throw FormatError("phone set must start with the blank symbol");
  if (index_.size() != symbols_.size())
    throw FormatError("phone set contains duplicate symbols");
  for (const auto& [id, indices] : per_language_) {
    if (indices.empty() || indices[0] != 0)
      throw FormatError("language '" + id + "' does not include blank");
    for (std::size_t i : indices)
      if (i >= symbols_.size())
        throw FormatError("language '" + id + "' references index out of range");
  }
}

std::string UniversalPhoneSet::Serialize() const {
  std::ostringstream out;
  out << "version " << version_ << '\n';
  for (const auto& s : symbols_) out << "symbol " << s << '\n';
  for (const auto& [id, indices] : per_language_) {
    out << "lang " << id;
    for (std::size_t i : indices) out << ' ' << symbols_[i];
    out << '\n';
  }
  return out.str();
}

UniversalPhoneSet UniversalPhoneSet::Parse(std::string_view text) {
  UniversalPhoneSet set;
  set.symbols_.clear();
  bool have_version = false;
  bool in_langs = false;
  for (std::string_view line : SplitLines(text)) {
    auto words = SplitWords(line);
    if (words.empty()) continue;
    const std::string_view tag = words[0];
    if (tag == "version") {
      if (have_version || words.size() != 2)
        throw FormatError("phone set: bad version line '" + std::string(line) + "'");
      try {
        set.version_ = std::stoull(std::string(words[1]));
      } catch (const std::exception&) {
        throw FormatError("phone set: bad version '" + std::string(words[1]) + "'");
      }
      have_version = true;
    } else if (tag == "symbol") {
      if (!have_version || in_langs || words.size() != 2)
        throw FormatError("phone set: misplaced symbol line '" + std::string(line) + "'");
      std::string ipa = set.symbols_.empty() ? std::string(words[1])
                                             : NormalizeNfc(words[1]);
      if (!set.symbols_.empty()) PhoneSymbol check(ipa);
      if (set.index_.count(ipa))
        throw FormatError("phone set: duplicate symbol '" + ipa + "'");
      set.AddSymbol(ipa);
    } else if (tag == "lang") {
      if (words.size() < 3)
        throw FormatError("phone set: bad lang line '" + std::string(line) + "'");
      in_langs = true;
      std::string id(words[1]);
      CheckLanguageId(id);
      if (set.per_language_.count(id))
        throw FormatError("phone set: language '" + id + "' listed twice");
      std::vector<std::size_t> indices;
      for (std::size_t k = 2; k < words.size(); ++k) {
        auto idx = set.IndexOf(k == 2 ? std::string(words[k]) : NormalizeNfc(words[k]));
        if (!idx)
          throw FormatError("phone set: language '" + id + "' uses unknown symbol '" +
                            std::string(words[k]) + "'");
        indices.push_back(*idx);
      }
      if (!std::is_sorted(indices.begin(), indices.end()) ||
          std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw FormatError("phone set: language '" + id + "' symbols not in index order");
      set.per_language_.emplace(std::move(id), std::move(indices));
    } else {
      throw FormatError("phone set: unknown record '" + std::string(tag) + "'");
    }
  }
  if (!have_version) throw FormatError("phone set: missing version line");
  set.CheckInvariants();
  return set;
}

UniversalPhoneSet MergePhoneSets(std::span<const LanguagePhoneMap> maps) {
  if (maps.empty()) throw DomainError("merge of an empty list of phone maps");
  UniversalPhoneSet set;
  set.symbols_.clear();
  set.AddSymbol(std::string(kBlankToken));
  for (const auto& map : maps) {
    map.Validate();
    if (set.HasLanguage(map.language_id))
      throw DomainError("language '" + map.language_id + "' appears twice in merge");
    set.Register(map);
  }
  return set;
}

CoverageReport Coverage(const UniversalPhoneSet& universal,
                        const LanguagePhoneMap& target) {
  CoverageReport report;
  for (const auto& p : target.phones) {
    if (universal.IndexOf(p.ipa()))
      report.covered.push_back(p);
    else
      report.unseen.push_back(p);
  }
  report.covered_count = report.covered.size();
  return report;
}

PhoneSetExtension Extend(const UniversalPhoneSet& universal,
                         const LanguagePhoneMap& target) {
  target.Validate();
  PhoneSetExtension ext{universal, {}, {}};
  const std::size_t old_size = universal.size();
  ext.set.Register(target);
  ext.set.version_ = universal.version_ + 1;
  ext.index_map.resize(old_size);
  for (std::size_t i = 0; i < old_size; ++i) ext.index_map[i] = i;
  for (std::size_t i = old_size; i < ext.set.size(); ++i) ext.new_indices.push_back(i);
  return ext;
}

LabelSequence EncodeLabels(const UniversalPhoneSet& universal,
                           std::string_view language_id,
                           std::span<const std::string> phones) {
  const auto& allowed = universal.LanguageIndices(language_id);
  LabelSequence labels;
  labels.reserve(phones.size());
  for (const auto& p : phones) {
    auto idx = universal.IndexOf(NormalizeNfc(p));
    if (!idx || *idx == 0 ||
        !std::binary_search(allowed.begin(), allowed.end(), *idx))
      throw LookupError("symbol '" + p + "' is not in the inventory of language '" +
                        std::string(language_id) + "'");
    labels.push_back(static_cast<int>(*idx));
  }
  return labels;
}

std::vector<std::string> DecodeLabels(const UniversalPhoneSet& universal,
                                      const LabelSequence& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= universal.size())
      throw LookupError("label index " + std::to_string(l) + " out of range");
    out.push_back(universal.symbol(static_cast<std::size_t>(l)));
  }
  return out;
}

LanguagePhoneMap ParseLanguageMap(std::string_view text) {
  std::optional<LanguagePhoneMap> map;
  for (std::string_view line : SplitLines(text)) {
    auto words = SplitWords(line);
    if (words.empty() || words[0].front() == '#') continue;
    if (words[0] != "lang" || words.size() < 3 || map)
      throw FormatError("language map: expected a single 'lang <id> <phones...>' line");
    std::vector<std::string> phones(words.begin() + 2, words.end());
    try {
      map = LanguagePhoneMap::Make(std::string(words[1]), phones);
    } catch (const DomainError& e) {
      throw FormatError(std::string("language map: ") + e.what());
    }
  }
  if (!map) throw FormatError("language map: no 'lang' line");
  return *map;
}

std::string SerializeLanguageMap(const LanguagePhoneMap& map) {
  std::string out = "lang " + map.language_id;
  for (const auto& p : map.phones) out += " " + p.ipa();
  return out + "\n";
}

}  // namespace mlctc

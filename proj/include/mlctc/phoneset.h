// include/mlctc/phoneset.h

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

#ifndef MLCTC_PHONESET_H_
#define MLCTC_PHONESET_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlctc {

/// Reserved spelling of the CTC blank in every serialization.
inline constexpr std::string_view kBlankToken = "<blk>";

using LabelSequence = std::vector<int>;

struct PhoneSetExtension;
struct LanguagePhoneMap;

/// One IPA phone. The text is stored NFC-normalized; two phones are the same
/// phone iff their normalized strings are byte-equal. Diacritics and tone
/// marks are kept, so "a" and "ã" are distinct phones.
class PhoneSymbol {
 public:
  /// Throws DomainError for empty text, whitespace, the blank token, or
  /// invalid UTF-8.
  explicit PhoneSymbol(std::string_view ipa);

  const std::string& ipa() const { return ipa_; }
  friend auto operator<=>(const PhoneSymbol&, const PhoneSymbol&) = default;

 private:
  std::string ipa_;
};

/// NFC form of a UTF-8 string.
std::string NormalizeNfc(std::string_view utf8);

struct LanguagePhoneMap {
  std::string language_id;
  std::vector<PhoneSymbol> phones;

  /// Throws DomainError on an empty inventory, duplicate phones, or a bad id.
  static LanguagePhoneMap Make(std::string language_id,
                               const std::vector<std::string>& phones);
  void Validate() const;
};

/// Ordered inventory with blank at index 0 and per-language subsets.
/// Immutable once built; Extend() returns a new value.
class UniversalPhoneSet {
 public:
  std::size_t size() const { return symbols_.size(); }
  std::uint64_t version() const { return version_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(std::size_t index) const { return symbols_.at(index); }
  std::optional<std::size_t> IndexOf(std::string_view ipa) const;
  bool HasLanguage(std::string_view language_id) const;
  std::vector<std::string> languages() const;
  /// Sorted indices of the language's phones, blank (0) included. Throws
  /// LookupError for unknown languages.
  const std::vector<std::size_t>& LanguageIndices(std::string_view language_id) const;

  /// Line-oriented text form; Parse(Serialize()) reproduces the value and
  /// Serialize(Parse(text)) reproduces canonical text byte for byte.
  std::string Serialize() const;
  static UniversalPhoneSet Parse(std::string_view text);

  friend bool operator==(const UniversalPhoneSet&, const UniversalPhoneSet&) = default;

 private:
  friend UniversalPhoneSet MergePhoneSets(std::span<const LanguagePhoneMap>);
  friend PhoneSetExtension Extend(const UniversalPhoneSet&,
                                  const LanguagePhoneMap&);

  std::size_t AddSymbol(const std::string& ipa);
  void Register(const LanguagePhoneMap& map);
  void CheckInvariants() const;

  std::vector<std::string> symbols_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> per_language_;
  std::uint64_t version_ = 1;
};

struct CoverageReport {
  std::vector<PhoneSymbol> covered;
  std::vector<PhoneSymbol> unseen;
  std::size_t covered_count = 0;
};

struct PhoneSetExtension {
  UniversalPhoneSet set;
  /// index_map[old] = new index; identity for every pre-existing symbol.
  std::vector<std::size_t> index_map;
  /// Indices assigned to symbols that were unseen before the extension.
  std::vector<std::size_t> new_indices;
};

/// Blank first, then every phone in first-appearance order across the maps.
/// Throws DomainError on an empty list or a repeated language id.
UniversalPhoneSet MergePhoneSets(std::span<const LanguagePhoneMap> maps);

CoverageReport Coverage(const UniversalPhoneSet& universal,
                        const LanguagePhoneMap& target);

/// Appends the target's unseen phones and registers the target language.
/// The version always increases by one.
PhoneSetExtension Extend(const UniversalPhoneSet& universal,
                         const LanguagePhoneMap& target);

/// Throws LookupError naming the unknown language or symbol.
LabelSequence EncodeLabels(const UniversalPhoneSet& universal,
                           std::string_view language_id,
                           std::span<const std::string> phones);
std::vector<std::string> DecodeLabels(const UniversalPhoneSet& universal,
                                      const LabelSequence& labels);

/// Language map files hold one line: `lang <id> <ipa> <ipa> ...`.
/// Blank lines and lines starting with '#' are ignored.
LanguagePhoneMap ParseLanguageMap(std::string_view text);
std::string SerializeLanguageMap(const LanguagePhoneMap& map);

}  // namespace mlctc

#endif  // MLCTC_PHONESET_H_

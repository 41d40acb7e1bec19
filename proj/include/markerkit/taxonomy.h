// Copyright 2026 The markerkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The closed registry of marker categories and the typed Marker / MarkerList
// values built on top of it.
//
// Thirteen categories exist. Each has a value kind:
//   integer        non-negative decimal digits (counts)
//   decimal        any finite floating point value
//   enum           one of a fixed, case-sensitive list of tokens
//   language-enum  one of the supported language names
//
// The registry is immutable and safe to read from any thread.

#ifndef MARKERKIT_TAXONOMY_H_
#define MARKERKIT_TAXONOMY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "markerkit/expected.h"

namespace markerkit {

enum class ValueKind { kInteger, kDecimal, kEnum, kLanguageEnum };

std::string_view to_string(ValueKind kind);

struct CategorySpec {
  std::string tag_name;
  ValueKind value_kind;
  std::vector<std::string> allowed_values;  // nonempty iff an enum kind
  std::string description;
};

// Canonical tag names.
namespace tags {
inline constexpr std::string_view kCodeType = "code_type";
inline constexpr std::string_view kDomain = "domain";
inline constexpr std::string_view kFormat = "format";
inline constexpr std::string_view kLanguage = "language";
inline constexpr std::string_view kLengthBucket = "length_bucket";
inline constexpr std::string_view kLengthPara = "length_para";
inline constexpr std::string_view kLengthSent = "length_sent";
inline constexpr std::string_view kLengthTokens = "length_tokens";
inline constexpr std::string_view kQuality = "quality";
inline constexpr std::string_view kQualityBucket = "quality_bucket";
inline constexpr std::string_view kSource = "source";
inline constexpr std::string_view kStyle = "style";
inline constexpr std::string_view kTask = "task";
}  // namespace tags

/// All 13 categories in canonical (ascending tag name) order.
std::span<const CategorySpec> list_categories();

/// The 23 supported language names, as spelled in the `language` category.
std::span<const std::string> supported_languages();

/// Marker value used when a record's language is not known.
inline constexpr std::string_view kUnspecifiedLanguage = "Unspecified";

/// Maps alternate tag spellings (`lang`, `length_sentences`,
/// `length_paragraphs`) to their canonical names. Unknown names pass through.
std::string_view canonical_tag(std::string_view tag);

enum class RejectionCode { kUnknownCategory, kWrongKind, kValueNotAllowed };

std::string_view to_string(RejectionCode code);

struct Rejection {
  RejectionCode code;
  std::string detail;
};

Expected<const CategorySpec*, Rejection> category_spec(std::string_view tag);

using MarkerValue = std::variant<std::int64_t, double, std::string>;

class Marker {
 public:
  const std::string& category() const { return category_; }
  const MarkerValue& value() const { return value_; }

  /// Text form used inside the template, e.g. `199`, `0.8125`, `Sciences`.
  std::string render() const;

  friend bool operator==(const Marker&, const Marker&) = default;

 private:
  friend Expected<Marker, Rejection> validate_marker(std::string_view,
                                                     std::string_view);
  friend Marker integer_marker(std::string_view, std::int64_t);
  friend Marker decimal_marker(std::string_view, double);
  friend Marker enum_marker(std::string_view, std::string_view);
  Marker(std::string category, MarkerValue value)
      : category_(std::move(category)), value_(std::move(value)) {}

  std::string category_;
  MarkerValue value_;
};

/// Validates a raw (category, value) pair against the registry. Total: never
/// throws, every input yields a Marker or a typed rejection. The category may
/// use an alias spelling; the resulting Marker always carries the canonical
/// tag name.
Expected<Marker, Rejection> validate_marker(std::string_view category,
                                            std::string_view value);

/// Convenience builders for values computed in code. These check the value
/// against the registry and throw std::invalid_argument on a mismatch, since
/// a mismatch here is a programming error rather than bad input.
Marker integer_marker(std::string_view category, std::int64_t value);
Marker decimal_marker(std::string_view category, double value);
Marker enum_marker(std::string_view category, std::string_view value);

/// At most one marker per category, iterated in canonical order.
class MarkerList {
 public:
  using Storage = std::map<std::string, Marker, std::less<>>;
  using const_iterator = Storage::const_iterator;

  MarkerList() = default;

  /// Inserts or replaces the marker for its category.
  void set(Marker marker);
  /// Inserts only when the category is absent; returns false on duplicate.
  bool insert(Marker marker);
  bool erase(std::string_view category);

  bool contains(std::string_view category) const;
  const Marker* find(std::string_view category) const;
  bool empty() const { return markers_.empty(); }
  std::size_t size() const { return markers_.size(); }

  /// Tag names in canonical order.
  std::vector<std::string> categories() const;

  /// True when every marker here appears, with the same value, in `other`.
  bool is_subset_of(const MarkerList& other) const;

  const_iterator begin() const { return markers_.begin(); }
  const_iterator end() const { return markers_.end(); }

  friend bool operator==(const MarkerList&, const MarkerList&) = default;

 private:
  Storage markers_;
};

}  // namespace markerkit

#endif  // MARKERKIT_TAXONOMY_H_

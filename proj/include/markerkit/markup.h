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

// Serializer and parsers for the marker template block:
//
//   <MARKER_LIST>
//   <domain>Sciences</domain>
//   <language>French</language>
//   </MARKER_LIST>
//
// The canonical form has one `<tag>value</tag>` line per marker in ascending
// tag order, no indentation, no padding and single '\n' separators. An empty
// list serializes to "<MARKER_LIST>\n</MARKER_LIST>".

#ifndef MARKERKIT_MARKUP_H_
#define MARKERKIT_MARKUP_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markerkit/expected.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

inline constexpr std::string_view kBlockOpen = "<MARKER_LIST>";
inline constexpr std::string_view kBlockClose = "</MARKER_LIST>";

std::string serialize_marker_list(const MarkerList& markers);

enum class ParseErrorCode {
  kNotABlock,
  kMalformedEntry,
  kUnknownCategory,
  kDuplicateCategory,
  kInvalidValue,
};

std::string_view to_string(ParseErrorCode code);

struct ParseError {
  ParseErrorCode code;
  std::string detail;
};

/// Strict parse. The whole input (modulo surrounding whitespace) must be one
/// block; every entry must validate. Alias tag spellings are accepted.
Expected<MarkerList, ParseError> parse_marker_list(std::string_view text);

struct DroppedEntry {
  std::string tag;    // as written; empty when the entry had no tag
  std::string value;  // normalized value, or the raw text of a bad entry
  std::string reason;
};

struct LenientParse {
  MarkerList markers;
  std::vector<DroppedEntry> dropped;
};

/// How an `Unspecified` enum value is read. Annotators use it to abstain;
/// in training targets and model output it is an ordinary domain value.
enum class UnspecifiedPolicy { kAbstain, kKeep };

/// Lenient parse for annotator and model output. Entries may share lines,
/// values are trimmed and stripped of surrounding backticks/quotes, invalid
/// or duplicate entries are dropped and reported. Under kAbstain an
/// `Unspecified` value is dropped with reason "abstention". The closer may be
/// written `/MARKER_LIST`. Fails only when no block exists.
Expected<LenientParse, ParseError> parse_lenient(
    std::string_view text,
    UnspecifiedPolicy unspecified = UnspecifiedPolicy::kAbstain);

struct TemplateBlock {
  std::string raw_text;  // from kBlockOpen through kBlockClose inclusive
  std::size_t begin = 0;  // offsets of raw_text within the host text
  std::size_t end = 0;
  MarkerList markers;  // lenient parse of raw_text, Unspecified kept
  std::vector<DroppedEntry> dropped;
};

struct Extraction {
  std::optional<TemplateBlock> block;
  std::string remainder;
  /// Delimiter bytes removed next to the block (0 or 1).
  std::size_t removed_separator = 0;
};

/// Finds the first `<MARKER_LIST>...</MARKER_LIST>` span. The remainder is
/// the host text without that span and without one adjacent '\n' (the one
/// following the span if present, else the one preceding it).
Extraction extract_first_block(std::string_view text);

}  // namespace markerkit

#endif  // MARKERKIT_MARKUP_H_

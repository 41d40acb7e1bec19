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

#include "markerkit/markup.h"

#include <algorithm>

#include "text_util.h"

namespace markerkit {
namespace {

using internal::trim;

constexpr std::string_view kLooseClose = "/MARKER_LIST";
constexpr std::string_view kUnspecified = "Unspecified";

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

struct RawEntry {
  std::string_view tag;
  std::string_view value;
};

// Matches exactly `<tag>value</tag>` over the whole of `line`.
std::optional<RawEntry> match_entry(std::string_view line) {
  if (line.size() < 5 || line.front() != '<' || line.back() != '>') {
    return std::nullopt;
  }
  std::size_t tag_end = line.find('>');
  std::string_view tag = line.substr(1, tag_end - 1);
  if (tag.empty() || !std::all_of(tag.begin(), tag.end(), is_tag_char)) {
    return std::nullopt;
  }
  std::string closer = "</" + std::string(tag) + ">";
  if (line.size() < tag_end + 1 + closer.size() ||
      line.substr(line.size() - closer.size()) != closer) {
    return std::nullopt;
  }
  std::string_view value = line.substr(
      tag_end + 1, line.size() - closer.size() - (tag_end + 1));
  return RawEntry{tag, value};
}

std::string_view strip_decorations(std::string_view v) {
  v = trim(v);
  while (v.size() >= 2) {
    char f = v.front();
    char b = v.back();
    if ((f == '`' && b == '`') || (f == '"' && b == '"') ||
        (f == '\'' && b == '\'')) {
      v = trim(v.substr(1, v.size() - 2));
    } else {
      break;
    }
  }
  return v;
}

ParseError error(ParseErrorCode code, std::string detail) {
  return ParseError{code, std::move(detail)};
}

}  // namespace

std::string_view to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::kNotABlock:
      return "not_a_block";
    case ParseErrorCode::kMalformedEntry:
      return "malformed_entry";
    case ParseErrorCode::kUnknownCategory:
      return "unknown_category";
    case ParseErrorCode::kDuplicateCategory:
      return "duplicate_category";
    case ParseErrorCode::kInvalidValue:
      return "invalid_value";
  }
  return "unknown";
}

std::string serialize_marker_list(const MarkerList& markers) {
  std::string out(kBlockOpen);
  out += '\n';
  for (const auto& [tag, marker] : markers) {
    out += '<';
    out += tag;
    out += '>';
    out += marker.render();
    out += "</";
    out += tag;
    out += ">\n";
  }
  out += kBlockClose;
  return out;
}

Expected<MarkerList, ParseError> parse_marker_list(std::string_view text) {
  std::string_view body = trim(text);
  if (!body.starts_with(kBlockOpen) || !body.ends_with(kBlockClose) ||
      body.size() < kBlockOpen.size() + kBlockClose.size()) {
    return unexpected(error(ParseErrorCode::kNotABlock,
                            "input is not a single marker block"));
  }
  std::string_view inner = body.substr(
      kBlockOpen.size(), body.size() - kBlockOpen.size() - kBlockClose.size());
  if (inner.find(kBlockOpen) != std::string_view::npos ||
      inner.find(kBlockClose) != std::string_view::npos) {
    return unexpected(
        error(ParseErrorCode::kNotABlock, "nested or repeated block"));
  }

  MarkerList out;
  while (!inner.empty()) {
    std::size_t nl = inner.find('\n');
    std::string_view line = trim(inner.substr(0, nl));
    inner = nl == std::string_view::npos ? std::string_view{}
                                         : inner.substr(nl + 1);
    if (line.empty()) continue;

    auto entry = match_entry(line);
    if (!entry) {
      return unexpected(error(ParseErrorCode::kMalformedEntry,
                              "malformed entry: " + std::string(line)));
    }
    auto marker = validate_marker(entry->tag, trim(entry->value));
    if (!marker) {
      auto code = marker.error().code == RejectionCode::kUnknownCategory
                      ? ParseErrorCode::kUnknownCategory
                      : ParseErrorCode::kInvalidValue;
      return unexpected(error(code, marker.error().detail));
    }
    std::string tag = marker->category();
    if (!out.insert(std::move(marker).value())) {
      return unexpected(error(ParseErrorCode::kDuplicateCategory,
                              "duplicate category '" + tag + "'"));
    }
  }
  return out;
}

Expected<LenientParse, ParseError> parse_lenient(std::string_view text,
                                                 UnspecifiedPolicy unspecified) {
  std::size_t open = text.find(kBlockOpen);
  if (open == std::string_view::npos) {
    return unexpected(error(ParseErrorCode::kNotABlock, "no marker block"));
  }
  std::string_view rest = text.substr(open + kBlockOpen.size());
  // kLooseClose is a suffix of kBlockClose, so one search finds either form.
  std::size_t close = rest.find(kLooseClose);
  if (close == std::string_view::npos) {
    return unexpected(error(ParseErrorCode::kNotABlock, "unterminated block"));
  }
  if (close > 0 && rest[close - 1] == '<') --close;
  std::string_view inner = rest.substr(0, close);

  LenientParse out;
  std::size_t pos = 0;
  while (pos < inner.size()) {
    std::size_t lt = inner.find('<', pos);
    std::string_view gap =
        trim(inner.substr(pos, lt == std::string_view::npos ? inner.size() - pos
                                                            : lt - pos));
    if (!gap.empty()) {
      out.dropped.push_back({"", std::string(gap), "stray text"});
    }
    if (lt == std::string_view::npos) break;

    std::size_t gt = inner.find('>', lt);
    std::string_view tag =
        gt == std::string_view::npos ? std::string_view{}
                                     : inner.substr(lt + 1, gt - lt - 1);
    if (tag.empty() || !std::all_of(tag.begin(), tag.end(), is_tag_char)) {
      std::size_t nl = inner.find('\n', lt);
      std::size_t stop = nl == std::string_view::npos ? inner.size() : nl;
      out.dropped.push_back(
          {"", std::string(trim(inner.substr(lt, stop - lt))),
           "malformed entry"});
      pos = stop;
      continue;
    }
    std::string closer = "</" + std::string(tag) + ">";
    std::size_t end = inner.find(closer, gt + 1);
    if (end == std::string_view::npos) {
      std::size_t nl = inner.find('\n', gt);
      std::size_t stop = nl == std::string_view::npos ? inner.size() : nl;
      out.dropped.push_back({std::string(tag),
                             std::string(trim(inner.substr(gt + 1, stop - gt - 1))),
                             "unterminated entry"});
      pos = stop;
      continue;
    }
    std::string_view value = strip_decorations(inner.substr(gt + 1, end - gt - 1));
    pos = end + closer.size();

    auto spec = category_spec(canonical_tag(tag));
    if (unspecified == UnspecifiedPolicy::kAbstain && spec &&
        (*spec)->value_kind != ValueKind::kInteger &&
        (*spec)->value_kind != ValueKind::kDecimal && value == kUnspecified) {
      out.dropped.push_back({std::string(tag), std::string(value), "abstention"});
      continue;
    }
    auto marker = validate_marker(tag, value);
    if (!marker) {
      out.dropped.push_back({std::string(tag), std::string(value),
                             std::string(to_string(marker.error().code))});
      continue;
    }
    if (out.markers.contains(marker->category())) {
      out.dropped.push_back(
          {std::string(tag), std::string(value), "duplicate_category"});
      continue;
    }
    out.markers.insert(std::move(marker).value());
  }
  return out;
}

Extraction extract_first_block(std::string_view text) {
  Extraction out;
  std::size_t open = text.find(kBlockOpen);
  std::size_t close = open == std::string_view::npos
                          ? std::string_view::npos
                          : text.find(kBlockClose, open + kBlockOpen.size());
  if (close == std::string_view::npos) {
    out.remainder = std::string(text);
    return out;
  }
  std::size_t end = close + kBlockClose.size();

  TemplateBlock block;
  block.raw_text = std::string(text.substr(open, end - open));
  block.begin = open;
  block.end = end;
  if (auto parsed = parse_lenient(block.raw_text, UnspecifiedPolicy::kKeep)) {
    block.markers = std::move(parsed->markers);
    block.dropped = std::move(parsed->dropped);
  }

  std::size_t cut_begin = open;
  std::size_t cut_end = end;
  if (end < text.size() && text[end] == '\n') {
    ++cut_end;
    out.removed_separator = 1;
  } else if (open > 0 && text[open - 1] == '\n') {
    --cut_begin;
    out.removed_separator = 1;
  }
  out.remainder.reserve(text.size() - (cut_end - cut_begin));
  out.remainder.append(text.substr(0, cut_begin));
  out.remainder.append(text.substr(cut_end));
  out.block = std::move(block);
  return out;
}

}  // namespace markerkit

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

#include "markerkit/taxonomy.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace markerkit {
namespace {

const std::vector<std::string>& language_names() {
  static const std::vector<std::string> kLanguages = {
      "Arabic",     "Chinese", "Czech",    "Dutch",      "English",
      "French",     "German",  "Greek",    "Hebrew",     "Hindi",
      "Indonesian", "Italian", "Japanese", "Korean",     "Persian",
      "Polish",     "Portuguese", "Romanian", "Russian", "Spanish",
      "Turkish",    "Ukrainian", "Vietnamese"};
  return kLanguages;
}

std::vector<CategorySpec> build_registry() {
  std::vector<CategorySpec> specs = {
      {"quality", ValueKind::kDecimal, {},
       "Score indicating the quality assigned to a sample as annotated by a "
       "human or a reward model."},
      {"quality_bucket", ValueKind::kEnum, {"1", "2", "3", "4"},
       "Quality bucketed into per-language quartiles; 1 is the highest "
       "quality and 4 the lowest."},
      {"length_tokens", ValueKind::kInteger, {}, "Number of tokens."},
      {"length_sent", ValueKind::kInteger, {}, "Number of sentences."},
      {"length_para", ValueKind::kInteger, {}, "Number of paragraphs."},
      {"length_bucket", ValueKind::kEnum, {"concise", "medium", "long"},
       "Token length bucketed into response length ranges."},
      {"task", ValueKind::kEnum,
       {"OpenEnded", "Explanation", "Translation", "Classification",
        "CreativeWriting", "QuestionAnswering", "InformationExtraction",
        "Summarization", "Rewrite", "Reasoning", "CodeGeneration", "CodeFix",
        "CodeTranslation", "CodeExplanation"},
       "Task-related information."},
      {"domain", ValueKind::kEnum,
       {"Sciences", "Technology", "SocialSciences", "Culture", "Medical",
        "Legal", "Unspecified", "Conversation", "Code", "Math"},
       "Domain-related information."},
      {"code_type", ValueKind::kEnum,
       {"python", "javascript", "cpp", "cobol", "java", "go", "rust", "swift",
        "csharp", "php", "typescript", "shell", "c", "kotlin", "ruby",
        "haskell", "sql"},
       "Programming language, for coding tasks."},
      {"format", ValueKind::kEnum,
       {"MCQAnswer", "ChainOfThought", "XML", "JSON", "Enumeration", "Tabular",
        "Markdown", "Latex"},
       "Desired generation format."},
      {"source", ValueKind::kEnum,
       {"Human", "Translation", "Synthetic", "Others"},
       "Source of the training data."},
      {"style", ValueKind::kEnum, {"Formal", "Informal", "Custom"},
       "Tone and style of the generation."},
      {"language", ValueKind::kLanguageEnum, language_names(),
       "The language of the completion."},
  };
  std::sort(specs.begin(), specs.end(),
            [](const CategorySpec& a, const CategorySpec& b) {
              return a.tag_name < b.tag_name;
            });
  return specs;
}

const std::vector<CategorySpec>& registry() {
  static const std::vector<CategorySpec> kRegistry = build_registry();
  return kRegistry;
}

Rejection reject(RejectionCode code, std::string detail) {
  return Rejection{code, std::move(detail)};
}

}  // namespace

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::kInteger:
      return "integer";
    case ValueKind::kDecimal:
      return "decimal";
    case ValueKind::kEnum:
      return "enum";
    case ValueKind::kLanguageEnum:
      return "language-enum";
  }
  return "unknown";
}

std::string_view to_string(RejectionCode code) {
  switch (code) {
    case RejectionCode::kUnknownCategory:
      return "unknown_category";
    case RejectionCode::kWrongKind:
      return "wrong_kind";
    case RejectionCode::kValueNotAllowed:
      return "value_not_allowed";
  }
  return "unknown";
}

std::span<const CategorySpec> list_categories() { return registry(); }

std::span<const std::string> supported_languages() { return language_names(); }

std::string_view canonical_tag(std::string_view tag) {
  if (tag == "lang") return tags::kLanguage;
  if (tag == "length_sentences") return tags::kLengthSent;
  if (tag == "length_paragraphs") return tags::kLengthPara;
  return tag;
}

Expected<const CategorySpec*, Rejection> category_spec(std::string_view tag) {
  const auto& specs = registry();
  auto it = std::lower_bound(
      specs.begin(), specs.end(), tag,
      [](const CategorySpec& s, std::string_view t) { return s.tag_name < t; });
  if (it == specs.end() || it->tag_name != tag) {
    return unexpected(reject(RejectionCode::kUnknownCategory,
                             "unknown category '" + std::string(tag) + "'"));
  }
  return &*it;
}

std::string Marker::render() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, std::string>) {
          return v;
        } else {
          std::array<char, 64> buf;
          auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
          return std::string(buf.data(), res.ptr);
        }
      },
      value_);
}

Expected<Marker, Rejection> validate_marker(std::string_view category,
                                            std::string_view value) {
  auto spec_or = category_spec(canonical_tag(category));
  if (!spec_or) return unexpected(spec_or.error());
  const CategorySpec& spec = **spec_or;
  const std::string where = spec.tag_name + "='" + std::string(value) + "'";

  switch (spec.value_kind) {
    case ValueKind::kInteger: {
      if (value.empty() || !std::all_of(value.begin(), value.end(), [](char c) {
            return c >= '0' && c <= '9';
          })) {
        return unexpected(
            reject(RejectionCode::kWrongKind, where + " is not an integer"));
      }
      std::int64_t n = 0;
      auto res = std::from_chars(value.data(), value.data() + value.size(), n);
      if (res.ec != std::errc()) {
        return unexpected(
            reject(RejectionCode::kValueNotAllowed, where + " out of range"));
      }
      return Marker(spec.tag_name, n);
    }
    case ValueKind::kDecimal: {
      double d = 0.0;
      auto res = std::from_chars(value.data(), value.data() + value.size(), d);
      if (value.empty() || res.ec == std::errc::invalid_argument ||
          res.ptr != value.data() + value.size()) {
        return unexpected(
            reject(RejectionCode::kWrongKind, where + " is not a decimal"));
      }
      if (res.ec != std::errc() || !std::isfinite(d)) {
        return unexpected(
            reject(RejectionCode::kValueNotAllowed, where + " is not finite"));
      }
      return Marker(spec.tag_name, d);
    }
    case ValueKind::kEnum:
    case ValueKind::kLanguageEnum: {
      const auto& allowed = spec.allowed_values;
      if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
        return unexpected(reject(RejectionCode::kValueNotAllowed,
                                 where + " is not an allowed value"));
      }
      return Marker(spec.tag_name, std::string(value));
    }
  }
  return unexpected(reject(RejectionCode::kWrongKind, where));
}

namespace {

Marker checked(Expected<Marker, Rejection> m) {
  if (!m) throw std::invalid_argument(m.error().detail);
  return std::move(m).value();
}

const CategorySpec& checked_spec(std::string_view category, ValueKind kind) {
  auto spec = category_spec(canonical_tag(category));
  if (!spec) throw std::invalid_argument(spec.error().detail);
  if ((*spec)->value_kind != kind) {
    throw std::invalid_argument("category '" + std::string(category) +
                                "' is not of kind " +
                                std::string(to_string(kind)));
  }
  return **spec;
}

}  // namespace

Marker integer_marker(std::string_view category, std::int64_t value) {
  const CategorySpec& spec = checked_spec(category, ValueKind::kInteger);
  if (value < 0) throw std::invalid_argument("negative count");
  return Marker(spec.tag_name, value);
}

Marker decimal_marker(std::string_view category, double value) {
  const CategorySpec& spec = checked_spec(category, ValueKind::kDecimal);
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value");
  return Marker(spec.tag_name, value);
}

Marker enum_marker(std::string_view category, std::string_view value) {
  return checked(validate_marker(category, value));
}

void MarkerList::set(Marker marker) {
  std::string key = marker.category();
  markers_.insert_or_assign(std::move(key), std::move(marker));
}

bool MarkerList::insert(Marker marker) {
  std::string key = marker.category();
  return markers_.try_emplace(std::move(key), std::move(marker)).second;
}

bool MarkerList::erase(std::string_view category) {
  auto it = markers_.find(category);
  if (it == markers_.end()) return false;
  markers_.erase(it);
  return true;
}

bool MarkerList::contains(std::string_view category) const {
  return markers_.find(category) != markers_.end();
}

const Marker* MarkerList::find(std::string_view category) const {
  auto it = markers_.find(category);
  return it == markers_.end() ? nullptr : &it->second;
}

std::vector<std::string> MarkerList::categories() const {
  std::vector<std::string> out;
  out.reserve(markers_.size());
  for (const auto& [tag, _] : markers_) out.push_back(tag);
  return out;
}

bool MarkerList::is_subset_of(const MarkerList& other) const {
  return std::all_of(markers_.begin(), markers_.end(), [&](const auto& kv) {
    const Marker* m = other.find(kv.first);
    return m != nullptr && *m == kv.second;
  });
}

}  // namespace markerkit

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

#include "markerkit/annotate.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "prompt_assets.h"
#include "text_util.h"
#include "utf8.h"

namespace markerkit {

using internal::is_han;
using internal::is_kana;
using internal::is_unicode_space;
using internal::next_scalar;

namespace {

bool splits_ideographs(std::string_view language) {
  return language == "Chinese" || language == "Japanese";
}

bool is_terminator(char32_t c) {
  switch (c) {
    case U'.':
    case U'!':
    case U'?':
    case U'。':
    case U'！':
    case U'？':
    case U'؟':
    case U'…':
      return true;
    default:
      return false;
  }
}

bool is_fullwidth_terminator(char32_t c) {
  return c == U'。' || c == U'！' || c == U'？';
}

}  // namespace

std::int64_t count_tokens(std::string_view text, std::string_view language) {
  const bool ideographs = splits_ideographs(language);
  std::int64_t count = 0;
  bool in_run = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t c = next_scalar(text, pos);
    if (is_unicode_space(c)) {
      in_run = false;
    } else if (ideographs && (is_han(c) || is_kana(c))) {
      in_run = false;
      ++count;
    } else if (!in_run) {
      in_run = true;
      ++count;
    }
  }
  return count;
}

std::int64_t count_sentences(std::string_view text,
                             std::string_view /*language*/) {
  std::int64_t count = 0;
  bool content = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t c = next_scalar(text, pos);
    if (is_terminator(c)) {
      content = true;
      bool fullwidth = is_fullwidth_terminator(c);
      std::size_t peek = pos;
      char32_t next = 0;
      bool at_end = true;
      while (peek < text.size()) {
        std::size_t before = peek;
        next = next_scalar(text, peek);
        if (!is_terminator(next)) {
          peek = before;
          at_end = false;
          break;
        }
        fullwidth = fullwidth || is_fullwidth_terminator(next);
      }
      pos = peek;
      if (at_end || fullwidth || is_unicode_space(next)) {
        ++count;
        content = false;
      }
    } else if (!is_unicode_space(c)) {
      content = true;
    }
  }
  if (content) ++count;
  return count;
}

std::int64_t count_paragraphs(std::string_view text) {
  std::int64_t count = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t sep = text.find("\n\n", pos);
    std::string_view segment =
        text.substr(pos, sep == std::string_view::npos ? text.size() - pos
                                                       : sep - pos);
    if (!internal::trim(segment).empty()) ++count;
    if (sep == std::string_view::npos) break;
    pos = sep + 2;
    while (pos < text.size() && text[pos] == '\n') ++pos;
  }
  return count;
}

Tokenizer default_tokenizer() {
  return [](std::string_view text, std::string_view language) {
    return count_tokens(text, language);
  };
}

TextStats text_stats(std::string_view text, std::string_view language,
                     const Tokenizer& tokenizer) {
  TextStats s;
  s.token_count =
      tokenizer ? tokenizer(text, language) : count_tokens(text, language);
  s.sentence_count = count_sentences(text, language);
  s.paragraph_count = count_paragraphs(text);
  return s;
}

std::string_view to_string(LengthBucket bucket) {
  switch (bucket) {
    case LengthBucket::kConcise:
      return "concise";
    case LengthBucket::kMedium:
      return "medium";
    case LengthBucket::kLong:
      return "long";
  }
  return "concise";
}

LengthBucket length_bucket(std::int64_t token_count) {
  if (token_count < 300) return LengthBucket::kConcise;
  if (token_count <= 1000) return LengthBucket::kMedium;
  return LengthBucket::kLong;
}

// ---------------------------------------------------------------------------

const LanguageQuartiles* QuartileTable::find(std::string_view language) const {
  auto it = entries_.find(language);
  return it == entries_.end() ? nullptr : &it->second;
}

double nearest_rank(std::span<const double> sorted, int percent) {
  const auto n = static_cast<std::int64_t>(sorted.size());
  std::int64_t rank = (percent * n + 99) / 100;
  rank = std::clamp<std::int64_t>(rank, 1, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

namespace {

int bucket_for(double score, const LanguageQuartiles& q) {
  if (score > q.q3) return 1;
  if (score > q.q2) return 2;
  if (score > q.q1) return 3;
  return 4;
}

}  // namespace

QuartileTable build_quartile_table(
    std::span<const std::pair<std::string, double>> scored_samples) {
  std::map<std::string, std::vector<double>, std::less<>> by_language;
  for (const auto& [language, score] : scored_samples) {
    if (std::isfinite(score)) by_language[language].push_back(score);
  }
  QuartileTable table;
  for (auto& [language, scores] : by_language) {
    if (scores.size() < 4) continue;
    std::sort(scores.begin(), scores.end());
    LanguageQuartiles q;
    q.q1 = nearest_rank(scores, 25);
    q.q2 = nearest_rank(scores, 50);
    q.q3 = nearest_rank(scores, 75);
    q.p95 = nearest_rank(scores, 95);
    q.max = scores.back();
    q.sample_count = static_cast<std::int64_t>(scores.size());

    std::array<std::vector<double>, 4> buckets;
    for (double s : scores) buckets[bucket_for(s, q) - 1].push_back(s);
    for (std::size_t b = 0; b < 4; ++b) {
      q.bucket_counts[b] = static_cast<std::int64_t>(buckets[b].size());
      if (!buckets[b].empty()) q.bucket_p95[b] = nearest_rank(buckets[b], 95);
    }
    table.put(language, q);
  }
  return table;
}

Expected<int, QualityError> quality_bucket(double score,
                                           std::string_view language,
                                           const QuartileTable& table) {
  const LanguageQuartiles* q = table.find(language);
  if (q == nullptr) return unexpected(QualityError::kUnknownLanguage);
  return bucket_for(score, *q);
}

std::string QuartileTable::to_json() const {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json languages = nlohmann::ordered_json::object();
  for (const auto& [language, q] : entries_) {
    nlohmann::ordered_json e;
    e["q1"] = q.q1;
    e["q2"] = q.q2;
    e["q3"] = q.q3;
    e["p95"] = q.p95;
    e["max"] = q.max;
    e["sample_count"] = q.sample_count;
    nlohmann::ordered_json p95s = nlohmann::ordered_json::array();
    for (const auto& v : q.bucket_p95) {
      p95s.push_back(v ? nlohmann::ordered_json(*v) : nullptr);
    }
    e["bucket_p95"] = std::move(p95s);
    e["bucket_counts"] = q.bucket_counts;
    languages[language] = std::move(e);
  }
  doc["languages"] = std::move(languages);
  return doc.dump(2) + "\n";
}

Expected<QuartileTable, std::string> QuartileTable::from_json(
    std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("languages") ||
      !doc["languages"].is_object()) {
    return unexpected(std::string("quartile table must be an object with a "
                                  "'languages' object"));
  }
  QuartileTable table;
  try {
    for (const auto& [language, e] : doc["languages"].items()) {
      LanguageQuartiles q;
      q.q1 = e.at("q1").get<double>();
      q.q2 = e.at("q2").get<double>();
      q.q3 = e.at("q3").get<double>();
      q.p95 = e.at("p95").get<double>();
      q.max = e.value("max", q.p95);
      q.sample_count = e.at("sample_count").get<std::int64_t>();
      if (!(q.q1 <= q.q2 && q.q2 <= q.q3 && q.q3 <= q.max)) {
        return unexpected("thresholds out of order for " + language);
      }
      if (auto it = e.find("bucket_p95"); it != e.end()) {
        for (std::size_t b = 0; b < 4 && b < it->size(); ++b) {
          if (!(*it)[b].is_null()) q.bucket_p95[b] = (*it)[b].get<double>();
        }
      }
      if (auto it = e.find("bucket_counts"); it != e.end()) {
        for (std::size_t b = 0; b < 4 && b < it->size(); ++b) {
          q.bucket_counts[b] = (*it)[b].get<std::int64_t>();
        }
      }
      table.put(language, q);
    }
  } catch (const nlohmann::json::exception& e) {
    return unexpected(std::string("bad quartile table: ") + e.what());
  }
  return table;
}

// ---------------------------------------------------------------------------

double round_quality(double score) {
  return std::round(score * 10000.0) / 10000.0;
}

namespace {

bool is_computed(std::string_view tag) {
  return tag == tags::kLengthTokens || tag == tags::kLengthSent ||
         tag == tags::kLengthPara || tag == tags::kLengthBucket ||
         tag == tags::kQuality || tag == tags::kQualityBucket;
}

void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings != nullptr) warnings->push_back(std::move(message));
}

}  // namespace

MarkerList annotate_deterministic(const SampleRecord& record,
                                  const QuartileTable* table,
                                  std::vector<std::string>* warnings,
                                  const Tokenizer& tokenizer) {
  MarkerList out;
  const std::string& lang = record.language;

  for (const auto& [key, raw] : record.metadata) {
    std::string_view tag = canonical_tag(key);
    if (is_computed(tag)) {
      warn(warnings, "metadata '" + key + "' ignored: computed from the text");
      continue;
    }
    if (tag == tags::kLanguage) {
      warn(warnings, "metadata '" + key + "' ignored: use the language field");
      continue;
    }
    auto marker = validate_marker(tag, internal::trim(raw));
    if (!marker) {
      warn(warnings, "metadata skipped: " + marker.error().detail);
      continue;
    }
    out.set(std::move(marker).value());
  }

  if (lang != kUnspecifiedLanguage) {
    if (auto m = validate_marker(tags::kLanguage, lang)) {
      out.set(std::move(m).value());
    } else {
      warn(warnings, "language skipped: " + m.error().detail);
    }
  }

  TextStats stats = text_stats(record.completion, lang, tokenizer);
  out.set(integer_marker(tags::kLengthTokens, stats.token_count));
  out.set(integer_marker(tags::kLengthSent, stats.sentence_count));
  out.set(integer_marker(tags::kLengthPara, stats.paragraph_count));
  out.set(enum_marker(tags::kLengthBucket,
                      to_string(length_bucket(stats.token_count))));

  if (record.quality_score && table != nullptr) {
    auto bucket = quality_bucket(*record.quality_score, lang, *table);
    if (bucket) {
      out.set(decimal_marker(tags::kQuality, round_quality(*record.quality_score)));
      out.set(enum_marker(tags::kQualityBucket, std::to_string(*bucket)));
    } else {
      warn(warnings, "no quality markers: language '" + lang +
                         "' is not in the quartile table");
    }
  }
  return out;
}

std::optional<std::string> build_classification_prompt(
    std::string_view category, std::string_view prompt_text) {
  std::string_view tmpl;
  if (category == tags::kDomain) {
    tmpl = assets::kDomainPrompt;
  } else if (category == tags::kTask) {
    tmpl = assets::kTaskPrompt;
  } else if (category == tags::kFormat) {
    tmpl = assets::kFormatPrompt;
  } else {
    return std::nullopt;
  }
  constexpr std::string_view kSlot = "Prompt : ";
  constexpr std::string_view kAnswer = "\nAnswer : ";
  std::size_t slot = tmpl.rfind(kSlot);
  std::size_t answer = tmpl.find(kAnswer, slot);
  std::string out(tmpl.substr(0, slot + kSlot.size()));
  out += prompt_text;
  out += tmpl.substr(answer);
  return out;
}

std::string normalize_class_reply(std::string_view reply) {
  std::string_view v = internal::trim(reply);
  while (v.size() >= 2 &&
         ((v.front() == '`' && v.back() == '`') ||
          (v.front() == '"' && v.back() == '"') ||
          (v.front() == '\'' && v.back() == '\''))) {
    v = internal::trim(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

namespace {

enum class ReplyKind { kClass, kAbstain, kInvalid };

std::pair<ReplyKind, std::optional<Marker>> interpret_reply(
    std::string_view category, std::string_view reply) {
  std::string value = normalize_class_reply(reply);
  if (value == "Unspecified") return {ReplyKind::kAbstain, std::nullopt};
  if (auto m = validate_marker(category, value)) {
    return {ReplyKind::kClass, std::move(m).value()};
  }
  // Few-shot answers in the domain prompt spell one class with a space
  // ("Social Sciences"); accept the joined form.
  std::string joined;
  std::copy_if(value.begin(), value.end(), std::back_inserter(joined),
               [](char c) { return c != ' '; });
  if (joined != value) {
    if (auto m = validate_marker(category, joined)) {
      return {ReplyKind::kClass, std::move(m).value()};
    }
  }
  return {ReplyKind::kInvalid, std::nullopt};
}

}  // namespace

LlmAnnotation annotate_with_llm(std::string_view prompt_text,
                                std::span<const std::string> categories,
                                const LlmClient& client) {
  LlmAnnotation out;
  for (const std::string& category : categories) {
    auto prompt = build_classification_prompt(category, prompt_text);
    if (!prompt) {
      out.warnings.push_back("no annotation prompt for category '" + category +
                             "'");
      continue;
    }
    CompletionRequest request;
    request.user = std::move(*prompt);
    request.temperature = 0.0;

    std::string last_reply;
    bool settled = false;
    for (int attempt = 0; attempt < 2 && !settled; ++attempt) {
      auto response = client.complete(request);
      if (!response) {
        out.warnings.push_back(category + ": annotator call failed (" +
                               std::string(to_string(response.error().code)) +
                               "): " + response.error().message);
        settled = true;
        break;
      }
      last_reply = response->text;
      auto [kind, marker] = interpret_reply(category, response->text);
      if (kind == ReplyKind::kClass) {
        out.markers.set(std::move(*marker));
        settled = true;
      } else if (kind == ReplyKind::kAbstain) {
        settled = true;
      }
    }
    if (!settled) {
      out.warnings.push_back(category + ": invalid class '" +
                             normalize_class_reply(last_reply) +
                             "' after retry; abstaining");
    }
  }
  return out;
}

}  // namespace markerkit

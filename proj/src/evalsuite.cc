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

#include "markerkit/evalsuite.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "markerkit/dataset.h"
#include "prompt_assets.h"
#include "text_util.h"

namespace markerkit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kWin:
      return "win";
    case Verdict::kLoss:
      return "loss";
    case Verdict::kTie:
      return "tie";
  }
  return "tie";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  if (text == "win") return Verdict::kWin;
  if (text == "loss") return Verdict::kLoss;
  if (text == "tie") return Verdict::kTie;
  return std::nullopt;
}

std::string_view to_string(EvalErrorCode code) {
  switch (code) {
    case EvalErrorCode::kEmptyInput:
      return "empty_input";
    case EvalErrorCode::kMissingField:
      return "missing_field";
    case EvalErrorCode::kMissingLanguageId:
      return "missing_language_id";
    case EvalErrorCode::kCategoryNeverPresent:
      return "category_never_present";
  }
  return "unknown";
}

Expected<EvalRecord, std::string> parse_eval_record(std::string_view line,
                                                    std::size_t ordinal) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return unexpected(std::string("record is not a JSON object"));
  }
  EvalRecord r;
  try {
    if (auto it = doc.find("id"); it != doc.end() && !it->is_null()) {
      r.id = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      r.id = std::to_string(ordinal);
    }
    r.prompt = doc.value("prompt", std::string());

    auto gen = doc.find("generation");
    if (gen == doc.end() || !gen->is_string()) {
      return unexpected(std::string("'generation' must be a string"));
    }
    r.generation = strip_output(gen->get<std::string>());

    if (auto it = doc.find("constraint"); it != doc.end() && !it->is_null()) {
      LengthConstraint c;
      std::string kind = it->at("kind").get<std::string>();
      if (kind == "tokens" || kind == "words") {
        c.kind = ConstraintKind::kTokens;
      } else if (kind == "sentences") {
        c.kind = ConstraintKind::kSentences;
      } else {
        return unexpected("unknown constraint kind '" + kind + "'");
      }
      c.limit = it->at("limit").get<std::int64_t>();
      if (c.limit < 0) return unexpected(std::string("negative limit"));
      r.constraint = c;
    }
    if (auto it = doc.find("target_language"); it != doc.end() && !it->is_null()) {
      r.target_language = it->get<std::string>();
    }
    if (auto it = doc.find("gold_markers"); it != doc.end() && !it->is_null()) {
      auto m = markers_from_json(*it);
      if (!m) return unexpected("gold_markers: " + m.error());
      r.gold_markers = std::move(m).value();
    }
    if (auto it = doc.find("judge_verdict"); it != doc.end() && !it->is_null()) {
      auto v = parse_verdict(it->get<std::string>());
      if (!v) return unexpected(std::string("unknown judge_verdict"));
      r.judge_verdict = v;
    }
    if (auto it = doc.find("baseline"); it != doc.end() && !it->is_null()) {
      r.baseline = it->get<std::string>();
    }
    if (auto it = doc.find("line_languages"); it != doc.end() && !it->is_null()) {
      r.line_languages = it->get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    return unexpected(std::string("bad field: ") + e.what());
  }
  return r;
}

double SliceStat::value() const {
  return denominator == 0 ? 0.0
                          : 100.0 * static_cast<double>(numerator) /
                                static_cast<double>(denominator);
}

double EvalReport::value() const {
  return SliceStat{numerator, denominator}.value();
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

ordered_json stat_json(std::int64_t num, std::int64_t den, double value) {
  ordered_json j;
  j["value"] = round2(value);
  j["numerator"] = num;
  j["denominator"] = den;
  return j;
}

}  // namespace

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["metric"] = metric;
  j["value"] = round2(value());
  j["numerator"] = numerator;
  j["denominator"] = denominator;
  ordered_json slices = ordered_json::object();
  for (const auto& [name, s] : per_slice) {
    slices[name] = stat_json(s.numerator, s.denominator, s.value());
  }
  j["per_slice"] = std::move(slices);
  j["notes"] = notes;
  return j;
}

std::string EvalReport::to_table() const {
  std::size_t width = std::max<std::size_t>(metric.size(), 5);
  for (const auto& [name, _] : per_slice) width = std::max(width, name.size() + 2);
  std::ostringstream out;
  auto row = [&](const std::string& name, std::int64_t num, std::int64_t den,
                 double value) {
    out << std::left << std::setw(static_cast<int>(width)) << name << std::right
        << std::setw(10) << std::fixed << std::setprecision(2) << value << "%"
        << std::setw(10) << num << std::setw(10) << den << "\n";
  };
  out << std::left << std::setw(static_cast<int>(width)) << "metric"
      << std::right << std::setw(11) << "value" << std::setw(10) << "num"
      << std::setw(10) << "den" << "\n";
  row(metric, numerator, denominator, value());
  for (const auto& [name, s] : per_slice) {
    row("  " + name, s.numerator, s.denominator, s.value());
  }
  for (const auto& note : notes) out << "note: " << note << "\n";
  return out.str();
}

Expected<EvalReport, EvalError> violation_rate(std::span<const EvalRecord> records,
                                               const Tokenizer& tokenizer) {
  if (records.empty()) {
    return unexpected(EvalError{EvalErrorCode::kEmptyInput, "no records"});
  }
  EvalReport report;
  report.metric = "violation";
  for (const auto& r : records) {
    if (!r.constraint) {
      return unexpected(EvalError{EvalErrorCode::kMissingField,
                                  "record " + r.id + " has no constraint"});
    }
    const std::string& text = r.generation.visible_completion;
    const std::string language = r.target_language.value_or("");
    std::int64_t measured =
        r.constraint->kind == ConstraintKind::kTokens
            ? (tokenizer ? tokenizer(text, language) : count_tokens(text, language))
            : count_sentences(text, language);
    bool violated = measured > r.constraint->limit;
    auto& slice = report.per_slice[std::string(to_string(r.constraint->kind))];
    ++slice.denominator;
    ++report.denominator;
    if (violated) {
      ++slice.numerator;
      ++report.numerator;
    }
  }
  return report;
}

std::vector<std::string> generation_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = internal::trim(text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    if (!line.empty()) out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

Expected<EvalReport, EvalError> line_pass_rate(std::span<const EvalRecord> records,
                                               const LanguageId& language_id) {
  if (!language_id) {
    return unexpected(EvalError{EvalErrorCode::kMissingLanguageId,
                                "no language identifier supplied"});
  }
  if (records.empty()) {
    return unexpected(EvalError{EvalErrorCode::kEmptyInput, "no records"});
  }
  EvalReport report;
  report.metric = "lpr";
  for (const auto& r : records) {
    if (!r.target_language) {
      return unexpected(EvalError{EvalErrorCode::kMissingField,
                                  "record " + r.id + " has no target_language"});
    }
    auto lines = generation_lines(r.generation.visible_completion);
    bool pass = !lines.empty() &&
                std::all_of(lines.begin(), lines.end(), [&](const std::string& l) {
                  return language_id(l) == *r.target_language;
                });
    auto& slice = report.per_slice[*r.target_language];
    ++slice.denominator;
    ++report.denominator;
    if (pass) {
      ++slice.numerator;
      ++report.numerator;
    }
  }
  return report;
}

Expected<LanguageId, std::string> labeled_language_id(
    std::span<const EvalRecord> records) {
  auto labels = std::make_shared<std::unordered_map<std::string, std::string>>();
  for (const auto& r : records) {
    if (r.line_languages.empty()) continue;
    auto lines = generation_lines(r.generation.visible_completion);
    if (lines.size() != r.line_languages.size()) {
      return unexpected("record " + r.id + ": " +
                        std::to_string(r.line_languages.size()) +
                        " line labels for " + std::to_string(lines.size()) +
                        " lines");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto [it, inserted] = labels->emplace(lines[i], r.line_languages[i]);
      if (!inserted && it->second != r.line_languages[i]) {
        return unexpected("conflicting labels for line '" + lines[i] + "'");
      }
    }
  }
  return LanguageId([labels](std::string_view line) -> std::string {
    auto it = labels->find(std::string(line));
    return it == labels->end() ? std::string() : it->second;
  });
}

Expected<EvalReport, EvalError> marker_accuracy(
    std::span<const MarkerList> predicted, std::span<const MarkerList> gold,
    std::span<const std::string> categories) {
  if (gold.empty()) {
    return unexpected(EvalError{EvalErrorCode::kEmptyInput, "no records"});
  }
  if (predicted.size() != gold.size()) {
    return unexpected(EvalError{EvalErrorCode::kMissingField,
                                "predicted and gold lists differ in length"});
  }
  EvalReport report;
  report.metric = "marker_accuracy";
  std::int64_t spurious = 0;
  for (const std::string& raw : categories) {
    const std::string cat(canonical_tag(raw));
    SliceStat slice;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const Marker* g = gold[i].find(cat);
      const Marker* p = predicted[i].find(cat);
      if (g == nullptr) {
        if (p != nullptr) ++spurious;
        continue;
      }
      ++slice.denominator;
      if (p != nullptr && *p == *g) ++slice.numerator;
    }
    if (slice.denominator == 0) {
      report.notes.push_back("category_never_present: " + cat);
      continue;
    }
    report.numerator += slice.numerator;
    report.denominator += slice.denominator;
    report.per_slice[cat] = slice;
  }
  report.notes.push_back("spurious_predictions: " + std::to_string(spurious));
  if (report.denominator == 0) {
    return unexpected(EvalError{EvalErrorCode::kCategoryNeverPresent,
                                "none of the requested categories is present "
                                "in the gold markers"});
  }
  return report;
}

Expected<EvalReport, EvalError> marker_accuracy(
    std::span<const EvalRecord> records, std::span<const std::string> categories) {
  std::vector<MarkerList> predicted;
  std::vector<MarkerList> gold;
  for (const auto& r : records) {
    predicted.push_back(r.generation.inferred_markers);
    gold.push_back(r.gold_markers.value_or(MarkerList{}));
  }
  return marker_accuracy(predicted, gold, categories);
}

Expected<EvalReport, EvalError> win_rate(std::span<const EvalRecord> records) {
  EvalReport report;
  report.metric = "winrate";
  std::int64_t skipped = 0;
  for (const auto& r : records) {
    if (!r.judge_verdict) {
      ++skipped;
      continue;
    }
    ++report.denominator;
    ++report.per_slice[std::string(to_string(*r.judge_verdict))].numerator;
    if (*r.judge_verdict == Verdict::kWin) ++report.numerator;
  }
  if (report.denominator == 0) {
    return unexpected(EvalError{EvalErrorCode::kEmptyInput, "no verdicts"});
  }
  for (auto& [_, s] : report.per_slice) s.denominator = report.denominator;
  if (skipped > 0) {
    report.notes.push_back("records_without_verdict: " + std::to_string(skipped));
  }
  return report;
}

std::string build_judge_prompt(std::string_view prompt,
                               std::string_view response_a,
                               std::string_view response_b) {
  std::string out(assets::kJudgePrompt);
  auto replace = [&out](std::string_view key, std::string_view value) {
    std::size_t at = out.find(key);
    if (at != std::string::npos) out.replace(at, key.size(), value);
  };
  // Responses are substituted after the prompt so that braces inside user
  // text are never treated as placeholders.
  replace("{prompt}", "\x01");
  replace("{response_a}", "\x02");
  replace("{response_b}", "\x03");
  replace("\x03", response_b);
  replace("\x02", response_a);
  replace("\x01", prompt);
  return out;
}

namespace {

enum class Preference { kFirst, kSecond, kNone };

Preference parse_preference(std::string_view reply) {
  std::string token;
  for (char c : internal::trim(reply)) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    } else if (!token.empty()) {
      break;
    }
  }
  if (token == "A") return Preference::kFirst;
  if (token == "B") return Preference::kSecond;
  return Preference::kNone;
}

}  // namespace

std::optional<Verdict> judge_pairwise(std::string_view prompt,
                                      std::string_view completion_a,
                                      std::string_view completion_b,
                                      const LlmClient& client,
                                      std::string* failure) {
  CompletionRequest forward;
  forward.user = build_judge_prompt(prompt, completion_a, completion_b);
  forward.temperature = 0.0;
  CompletionRequest swapped;
  swapped.user = build_judge_prompt(prompt, completion_b, completion_a);
  swapped.temperature = 0.0;

  auto first = client.complete(forward);
  if (!first) {
    if (failure != nullptr) *failure = first.error().message;
    return std::nullopt;
  }
  auto second = client.complete(swapped);
  if (!second) {
    if (failure != nullptr) *failure = second.error().message;
    return std::nullopt;
  }
  Preference p1 = parse_preference(first->text);
  Preference p2 = parse_preference(second->text);
  if (p1 == Preference::kFirst && p2 == Preference::kSecond) return Verdict::kWin;
  if (p1 == Preference::kSecond && p2 == Preference::kFirst) return Verdict::kLoss;
  return Verdict::kTie;
}

}  // namespace markerkit

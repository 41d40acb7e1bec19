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

#include "markerkit/inference.h"

#include <charconv>
#include <regex>

#include "prompt_assets.h"
#include "text_util.h"

namespace markerkit {

InferencePlan InferencePlan::inferred() {
  return InferencePlan(InferenceMode::kInferred, MarkerList{}, nullptr);
}

Expected<InferencePlan, std::string> InferencePlan::fixed(MarkerList markers) {
  if (markers.empty()) {
    return unexpected(std::string("fixed mode needs at least one marker"));
  }
  return InferencePlan(InferenceMode::kFixed, std::move(markers), nullptr);
}

Expected<InferencePlan, std::string> InferencePlan::on_the_fly(
    const LlmClient* annotator) {
  if (annotator == nullptr) {
    return unexpected(std::string("on-the-fly mode needs an annotator"));
  }
  return InferencePlan(InferenceMode::kOnTheFly, MarkerList{}, annotator);
}

InferencePlan::Prepared InferencePlan::prepare(std::string_view prompt) const {
  switch (mode_) {
    case InferenceMode::kInferred:
      return {std::string(prompt), {}};
    case InferenceMode::kFixed:
      return {inject_fixed(prompt, injected_), {}};
    case InferenceMode::kOnTheFly: {
      auto r = annotate_on_the_fly(prompt, *annotator_);
      return {std::move(r.prompt), std::move(r.warnings)};
    }
  }
  return {std::string(prompt), {}};
}

std::string inject_fixed(std::string_view prompt, const MarkerList& markers) {
  std::string out(prompt);
  out += '\n';
  out += serialize_marker_list(markers);
  return out;
}

std::string_view to_string(AnchorError e) {
  switch (e) {
    case AnchorError::kUnknownLanguage:
      return "unknown_language";
    case AnchorError::kBucketUnpopulated:
      return "bucket_unpopulated";
    case AnchorError::kBadBucket:
      return "bad_bucket";
  }
  return "unknown";
}

Expected<MarkerList, AnchorError> quality_anchor(int bucket,
                                                 std::string_view language,
                                                 const QuartileTable& table) {
  if (bucket < 1 || bucket > 4) return unexpected(AnchorError::kBadBucket);
  const LanguageQuartiles* q = table.find(language);
  if (q == nullptr) return unexpected(AnchorError::kUnknownLanguage);
  const auto& p95 = q->bucket_p95[static_cast<std::size_t>(bucket - 1)];
  if (!p95) return unexpected(AnchorError::kBucketUnpopulated);
  MarkerList out;
  out.set(enum_marker(tags::kQualityBucket, std::to_string(bucket)));
  out.set(decimal_marker(tags::kQuality, round_quality(*p95)));
  return out;
}

std::string_view to_string(ConstraintKind kind) {
  return kind == ConstraintKind::kTokens ? "tokens" : "sentences";
}

namespace {

// Instructions are short; matching only a bounded prefix keeps std::regex
// away from pathological inputs.
constexpr std::size_t kMaxInstructionBytes = 512;

const std::regex& instruction_regex() {
  static const std::regex kRe(
      R"(^\s*(?:)"
      R"((?:answer\s+the\s+following\s+instruction\s+)?using\s+(\d+)\s+(words?|sentences?)\s+or\s+(?:less|fewer)\b)"
      R"(|(?:(?:answer|respond|reply)\s+)?in\s+(\d+)\s+(words?|sentences?)\b)"
      R"(|(\d+)\s+(words?|sentences?)\s+or\s+(?:less|fewer)\b)"
      R"()\s*[.:]?)",
      std::regex::ECMAScript | std::regex::icase);
  return kRe;
}

}  // namespace

std::optional<LengthRewrite> rewrite_length_instructed(std::string_view prompt) {
  std::string head(prompt.substr(0, std::min(prompt.size(), kMaxInstructionBytes)));
  std::smatch m;
  if (!std::regex_search(head, m, instruction_regex(),
                         std::regex_constants::match_continuous)) {
    return std::nullopt;
  }
  std::string number;
  std::string unit;
  for (std::size_t g = 1; g + 1 < m.size(); g += 2) {
    if (m[g].matched) {
      number = m[g].str();
      unit = m[g + 1].str();
      break;
    }
  }
  std::int64_t limit = 0;
  auto res = std::from_chars(number.data(), number.data() + number.size(), limit);
  if (res.ec != std::errc() || res.ptr != number.data() + number.size()) {
    return std::nullopt;
  }

  std::size_t end = static_cast<std::size_t>(m.length(0));
  while (end < prompt.size() && internal::is_ascii_space(prompt[end])) ++end;
  if (end >= prompt.size()) return std::nullopt;

  LengthRewrite out;
  out.kind = (unit[0] == 'w' || unit[0] == 'W') ? ConstraintKind::kTokens
                                                : ConstraintKind::kSentences;
  out.limit = limit;
  out.instruction_end = end;
  out.stripped_prompt = std::string(prompt.substr(end));
  out.markers.set(integer_marker(out.kind == ConstraintKind::kTokens
                                     ? tags::kLengthTokens
                                     : tags::kLengthSent,
                                 limit));
  return out;
}

std::string build_on_the_fly_prompt(std::string_view prompt) {
  constexpr std::string_view kSlot = "prompt: \"";
  constexpr std::string_view kSlotEnd = "\"\ntemplate:";
  std::string_view tmpl = assets::kOnTheFlyPrompt;
  std::size_t slot = tmpl.rfind(kSlot);
  std::size_t slot_end = tmpl.rfind(kSlotEnd);
  std::string out(tmpl.substr(0, slot + kSlot.size()));
  out += prompt;
  out += tmpl.substr(slot_end);
  return out;
}

OnTheFlyResult annotate_on_the_fly(std::string_view prompt,
                                   const LlmClient& client) {
  OnTheFlyResult out;
  out.prompt = std::string(prompt);

  CompletionRequest request;
  request.user = build_on_the_fly_prompt(prompt);
  auto response = client.complete(request);
  if (!response) {
    out.warnings.push_back("annotator call failed (" +
                           std::string(to_string(response.error().code)) +
                           "): " + response.error().message);
    return out;
  }
  auto parsed = parse_lenient(response->text);
  if (!parsed) {
    out.warnings.push_back("annotator reply has no marker block");
    return out;
  }
  for (const auto& d : parsed->dropped) {
    if (d.reason == "abstention") continue;
    out.warnings.push_back("dropped annotator entry <" + d.tag + ">" + d.value +
                           " (" + d.reason + ")");
  }
  out.dropped = std::move(parsed->dropped);
  if (parsed->markers.empty()) {
    out.warnings.push_back("annotator returned no usable markers");
    return out;
  }
  out.appended = std::move(parsed->markers);
  out.prompt = inject_fixed(prompt, out.appended);
  return out;
}

GenerationOutcome strip_output(std::string_view raw_model_output) {
  GenerationOutcome out;
  out.raw_output = std::string(raw_model_output);
  Extraction ex = extract_first_block(raw_model_output);
  if (ex.block) out.inferred_markers = std::move(ex.block->markers);
  out.visible_completion = std::move(ex.remainder);
  return out;
}

}  // namespace markerkit

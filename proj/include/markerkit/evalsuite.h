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

// Controllability metrics over generation results.
//
// Result lines (JSON Lines):
//   {"id": "...", "prompt": "...",
//    "constraint": {"kind": "tokens"|"sentences", "limit": 199},
//    "target_language": "French",
//    "gold_markers": {"domain": "Code"},
//    "generation": "<raw model output, possibly with a leading block>",
//    "judge_verdict": "win"|"loss"|"tie",
//    "baseline": "<competing completion for pairwise judging>",
//    "line_languages": ["French", "English"]}
// Every field except `generation` is optional; each metric checks the ones
// it needs.

#ifndef MARKERKIT_EVALSUITE_H_
#define MARKERKIT_EVALSUITE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "markerkit/annotate.h"
#include "markerkit/expected.h"
#include "markerkit/inference.h"
#include "markerkit/llmclient.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

enum class Verdict { kWin, kLoss, kTie };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

struct LengthConstraint {
  ConstraintKind kind = ConstraintKind::kTokens;
  std::int64_t limit = 0;
};

struct EvalRecord {
  std::string id;
  std::string prompt;
  std::optional<LengthConstraint> constraint;
  std::optional<std::string> target_language;
  std::optional<MarkerList> gold_markers;
  GenerationOutcome generation;
  std::optional<Verdict> judge_verdict;
  std::optional<std::string> baseline;
  /// Gold language per nonempty line, for fixture-driven identification.
  std::vector<std::string> line_languages;
};

Expected<EvalRecord, std::string> parse_eval_record(std::string_view line,
                                                    std::size_t ordinal);

struct SliceStat {
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  double value() const;
};

struct EvalReport {
  std::string metric;
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  std::map<std::string, SliceStat> per_slice;
  std::vector<std::string> notes;

  /// 100 * numerator / denominator.
  double value() const;

  nlohmann::ordered_json to_json() const;
  /// Aligned plain-text rendering with 2-decimal percentages.
  std::string to_table() const;
};

enum class EvalErrorCode {
  kEmptyInput,
  kMissingField,
  kMissingLanguageId,
  kCategoryNeverPresent,
};

std::string_view to_string(EvalErrorCode code);

struct EvalError {
  EvalErrorCode code;
  std::string message;
};

/// Percentage of records whose visible completion is strictly longer than
/// the constraint (tokens via `tokenizer`, sentences via count_sentences).
/// Slices by constraint kind.
Expected<EvalReport, EvalError> violation_rate(std::span<const EvalRecord> records,
                                               const Tokenizer& tokenizer = {});

/// Language identifier for one line of text.
using LanguageId = std::function<std::string(std::string_view line)>;

/// Nonempty trimmed lines of `text`, split on '\n'.
std::vector<std::string> generation_lines(std::string_view text);

/// A record passes when every nonempty line is identified as the target
/// language; an empty generation fails. Slices by target language.
Expected<EvalReport, EvalError> line_pass_rate(std::span<const EvalRecord> records,
                                               const LanguageId& language_id);

/// Identifier answering from the `line_languages` labels carried by the
/// records. Lines not covered by any label map to "".
Expected<LanguageId, std::string> labeled_language_id(
    std::span<const EvalRecord> records);

/// Per-category accuracy of predicted markers against gold, counting only
/// records whose gold list has the category. The headline numbers pool all
/// requested categories. Categories never present in gold are listed in
/// notes; it is an error only when none of them is present.
Expected<EvalReport, EvalError> marker_accuracy(
    std::span<const MarkerList> predicted, std::span<const MarkerList> gold,
    std::span<const std::string> categories);

/// Uses each record's inferred markers as predictions.
Expected<EvalReport, EvalError> marker_accuracy(
    std::span<const EvalRecord> records, std::span<const std::string> categories);

/// wins / (wins + losses + ties). Records without a verdict are skipped and
/// counted in notes.
Expected<EvalReport, EvalError> win_rate(std::span<const EvalRecord> records);

/// Builds the judge request for one ordering of the two responses.
std::string build_judge_prompt(std::string_view prompt,
                               std::string_view response_a,
                               std::string_view response_b);

/// Judges A against B twice with positions swapped. A consistent preference
/// wins; anything else is a tie. nullopt when a call fails.
std::optional<Verdict> judge_pairwise(std::string_view prompt,
                                      std::string_view completion_a,
                                      std::string_view completion_b,
                                      const LlmClient& client,
                                      std::string* failure = nullptr);

}  // namespace markerkit

#endif  // MARKERKIT_EVALSUITE_H_

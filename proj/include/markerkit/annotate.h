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

// Marker annotation: deterministic length/quality markers computed from the
// text, and LLM classification for domain, task and format.

#ifndef MARKERKIT_ANNOTATE_H_
#define MARKERKIT_ANNOTATE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "markerkit/expected.h"
#include "markerkit/llmclient.h"
#include "markerkit/sample.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

// ---------------------------------------------------------------------------
// Text statistics

/// Default token rule: maximal runs of non-whitespace (Unicode whitespace).
/// For Chinese and Japanese every Han, Hiragana or Katakana scalar is its own
/// token and the remaining runs count as words.
std::int64_t count_tokens(std::string_view text, std::string_view language);

/// Segments ended by a terminator run (. ! ? 。 ！ ？ ؟ …) followed by
/// whitespace or end of text, plus a trailing unterminated segment. The
/// full-width terminators 。！？ end a segment even when directly followed by
/// text, since the scripts that use them do not separate sentences by spaces.
std::int64_t count_sentences(std::string_view text, std::string_view language);

/// Nonempty segments when splitting on runs of two or more '\n'.
std::int64_t count_paragraphs(std::string_view text);

/// Pluggable token counter, e.g. to match a trainer's tokenizer.
using Tokenizer =
    std::function<std::int64_t(std::string_view text, std::string_view language)>;

Tokenizer default_tokenizer();

struct TextStats {
  std::int64_t token_count = 0;
  std::int64_t sentence_count = 0;
  std::int64_t paragraph_count = 0;
};

TextStats text_stats(std::string_view text, std::string_view language,
                     const Tokenizer& tokenizer = {});

enum class LengthBucket { kConcise, kMedium, kLong };

std::string_view to_string(LengthBucket bucket);

/// < 300 concise, 300..1000 medium, > 1000 long.
LengthBucket length_bucket(std::int64_t token_count);

// ---------------------------------------------------------------------------
// Quality quartiles

struct LanguageQuartiles {
  double q1 = 0;
  double q2 = 0;
  double q3 = 0;
  double p95 = 0;
  double max = 0;
  std::int64_t sample_count = 0;
  /// Nearest-rank 95th percentile of the scores falling in each quality
  /// bucket (index 0 is bucket 1); empty when the bucket has no scores.
  std::array<std::optional<double>, 4> bucket_p95;
  std::array<std::int64_t, 4> bucket_counts{};
};

class QuartileTable {
 public:
  using Map = std::map<std::string, LanguageQuartiles, std::less<>>;

  const LanguageQuartiles* find(std::string_view language) const;
  bool contains(std::string_view language) const {
    return find(language) != nullptr;
  }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }
  void put(std::string language, LanguageQuartiles q) {
    entries_.insert_or_assign(std::move(language), q);
  }

  std::string to_json() const;
  static Expected<QuartileTable, std::string> from_json(std::string_view text);

 private:
  Map entries_;
};

/// Nearest-rank percentile (1-based rank ceil(p/100 * n)) of ascending data.
double nearest_rank(std::span<const double> sorted, int percent);

/// Languages with fewer than 4 scores are left out.
QuartileTable build_quartile_table(
    std::span<const std::pair<std::string, double>> scored_samples);

enum class QualityError { kUnknownLanguage };

/// score > q3 -> 1, (q2, q3] -> 2, (q1, q2] -> 3, <= q1 -> 4.
Expected<int, QualityError> quality_bucket(double score,
                                           std::string_view language,
                                           const QuartileTable& table);

// ---------------------------------------------------------------------------
// Annotation

/// Quality scores are written with 4 decimal places.
double round_quality(double score);

/// Markers that follow from the record itself: length markers from the
/// completion, language, dataset metadata (any taxonomy category present in
/// `metadata`), and quality/quality_bucket when a score and a table entry
/// exist. Invalid metadata values are skipped and reported in `warnings`.
MarkerList annotate_deterministic(const SampleRecord& record,
                                  const QuartileTable* table,
                                  std::vector<std::string>* warnings = nullptr,
                                  const Tokenizer& tokenizer = {});

/// Categories the LLM annotator can fill.
inline constexpr std::array<std::string_view, 3> kLlmCategories = {
    tags::kDomain, tags::kTask, tags::kFormat};

/// The classification prompt for `category` with `prompt_text` placed in the
/// final `Prompt :` slot. Returns nullopt for categories without a prompt.
std::optional<std::string> build_classification_prompt(
    std::string_view category, std::string_view prompt_text);

/// Trims, then strips surrounding backticks and quotes.
std::string normalize_class_reply(std::string_view reply);

struct LlmAnnotation {
  MarkerList markers;
  std::vector<std::string> warnings;
};

/// One classification call per category. `Unspecified` is an abstention; an
/// invalid class is retried once and then abstained on with a warning.
/// Transport errors are retried by the client; if they persist the category
/// is abstained on with a warning.
LlmAnnotation annotate_with_llm(std::string_view prompt_text,
                                std::span<const std::string> categories,
                                const LlmClient& client);

}  // namespace markerkit

#endif  // MARKERKIT_ANNOTATE_H_

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

// Prompt construction and output interpretation for marker-trained models.
//
// Three modes:
//   inferred    the prompt is sent as is; the model writes its own block
//   fixed       caller-chosen markers are appended to the prompt
//   on_the_fly  an annotator LLM tags the prompt and the block is appended

#ifndef MARKERKIT_INFERENCE_H_
#define MARKERKIT_INFERENCE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markerkit/annotate.h"
#include "markerkit/expected.h"
#include "markerkit/llmclient.h"
#include "markerkit/markup.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

enum class InferenceMode { kInferred, kFixed, kOnTheFly };

class InferencePlan {
 public:
  static InferencePlan inferred();
  /// Fails when `markers` is empty.
  static Expected<InferencePlan, std::string> fixed(MarkerList markers);
  /// Fails when `annotator` is null.
  static Expected<InferencePlan, std::string> on_the_fly(
      const LlmClient* annotator);

  InferenceMode mode() const { return mode_; }
  const MarkerList& injected() const { return injected_; }
  const LlmClient* annotator() const { return annotator_; }

  struct Prepared {
    std::string prompt;
    std::vector<std::string> warnings;
  };
  /// The prompt to send to the model under this plan.
  Prepared prepare(std::string_view prompt) const;

 private:
  InferencePlan(InferenceMode mode, MarkerList injected,
                const LlmClient* annotator)
      : mode_(mode), injected_(std::move(injected)), annotator_(annotator) {}

  InferenceMode mode_;
  MarkerList injected_;
  const LlmClient* annotator_;
};

/// prompt + "\n" + serialized block; the same placement as training prompts.
std::string inject_fixed(std::string_view prompt, const MarkerList& markers);

enum class AnchorError { kUnknownLanguage, kBucketUnpopulated, kBadBucket };

std::string_view to_string(AnchorError e);

/// {quality_bucket: bucket, quality: 95th percentile of that language's
/// scores inside the bucket}.
Expected<MarkerList, AnchorError> quality_anchor(int bucket,
                                                 std::string_view language,
                                                 const QuartileTable& table);

enum class ConstraintKind { kTokens, kSentences };

std::string_view to_string(ConstraintKind kind);

struct LengthRewrite {
  std::string stripped_prompt;
  MarkerList markers;  // {length_tokens: N} or {length_sent: N}
  ConstraintKind kind;
  std::int64_t limit;
  std::size_t instruction_end;  // bytes removed from the front of the prompt
};

/// Recognizes a leading length instruction and removes it:
///   "[Answer the following instruction] using N words|sentences or less|fewer."
///   "[Answer|Respond|Reply] in N words|sentences."
///   "N words|sentences or less|fewer."
/// Matching ignores case and surrounding whitespace. Returns nullopt when
/// the prompt does not start with one of these.
std::optional<LengthRewrite> rewrite_length_instructed(std::string_view prompt);

struct OnTheFlyResult {
  std::string prompt;
  MarkerList appended;
  std::vector<DroppedEntry> dropped;
  std::vector<std::string> warnings;
};

/// The annotation request sent for `prompt`.
std::string build_on_the_fly_prompt(std::string_view prompt);

/// Tags `prompt` with one annotator call. Valid markers are appended to the
/// original prompt (instruction kept); if there are none, or the call fails,
/// the prompt comes back unchanged with a warning.
OnTheFlyResult annotate_on_the_fly(std::string_view prompt,
                                   const LlmClient& client);

struct GenerationOutcome {
  std::string raw_output;
  MarkerList inferred_markers;
  std::string visible_completion;
};

GenerationOutcome strip_output(std::string_view raw_model_output);

}  // namespace markerkit

#endif  // MARKERKIT_INFERENCE_H_

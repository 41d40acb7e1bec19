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

// Corpus ingestion, training example assembly and dataset statistics.
//
// Input lines (JSON Lines, UTF-8):
//   {"id": "...", "prompt": "...", "completion": "...", "language": "French",
//    "quality_score": 0.83, "metadata": {"source": "Human"},
//    "gold_markers": {"domain": "Code"}}          <- optional, tagged corpora
//
// Output lines, fields in this order:
//   {"input_text", "target_text", "gold_markers", "prompt_markers"}
// Marker listings are objects from tag name to the rendered value text.

#ifndef MARKERKIT_DATASET_H_
#define MARKERKIT_DATASET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "markerkit/dropout.h"
#include "markerkit/expected.h"
#include "markerkit/sample.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

struct IoError {
  std::string path;
  std::string message;
};

/// Reads a whole file; fails with IoError when unreadable.
Expected<std::string, IoError> read_file(const std::string& path);
/// Writes `content` to `path`, replacing it.
Expected<std::monostate, IoError> write_file(const std::string& path,
                                             std::string_view content);

/// Calls `fn(line_number, line)` for each non-blank line (1-based numbers).
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    fn(line_no, line);
  }
}

nlohmann::ordered_json markers_to_json(const MarkerList& markers);
/// Values may be strings or numbers; every entry is validated strictly.
Expected<MarkerList, std::string> markers_from_json(const nlohmann::json& j);

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  std::vector<SampleRecord> records;
  std::vector<LineError> errors;
  std::vector<std::string> warnings;
};

/// Parses one input line. `ordinal` (0-based position among non-blank lines)
/// becomes the id when the line has none. Warnings are appended.
Expected<SampleRecord, std::string> parse_sample(
    std::string_view line, std::size_t ordinal,
    std::vector<std::string>* warnings);

/// Loads a JSON Lines corpus. Malformed lines are reported with their line
/// numbers and skipped; only an unreadable file is an error.
Expected<LoadResult, IoError> load_samples(const std::string& path);
LoadResult load_samples_from_string(std::string_view text);

struct TrainingExample {
  std::string record_id;
  std::string input_text;
  std::string target_text;
  MarkerList gold_markers;
  MarkerList prompt_markers;
};

/// input_text  = prompt                  when no prompt-side markers survive
///             = prompt + "\n" + block   otherwise
/// target_text = block(gold) + "\n" + completion
TrainingExample build_training_example(const SampleRecord& record,
                                       const MarkerList& gold,
                                       const DropoutConfig& cfg);

/// One output line, without the trailing newline.
std::string format_example(const TrainingExample& example);

/// Writes one line per example; returns the number written.
Expected<std::size_t, IoError> write_dataset(
    const std::vector<TrainingExample>& examples, const std::string& path);

struct ValueShare {
  std::string value;
  std::int64_t count = 0;
  double percent = 0;
};

struct CategoryHistogram {
  std::string category;
  std::int64_t present = 0;  // records carrying this category
  std::vector<ValueShare> values;  // by descending count, then value
  std::vector<std::string> long_tail;  // share <= threshold
};

struct StatsReport {
  std::int64_t total_records = 0;
  double long_tail_threshold_percent = 5.0;
  std::vector<CategoryHistogram> categories;  // canonical order

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

StatsReport dataset_stats(const std::vector<MarkerList>& marker_lists,
                          double long_tail_threshold_percent = 5.0);

}  // namespace markerkit

#endif  // MARKERKIT_DATASET_H_

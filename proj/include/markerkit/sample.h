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

#ifndef MARKERKIT_SAMPLE_H_
#define MARKERKIT_SAMPLE_H_

#include <map>
#include <optional>
#include <string>

#include "markerkit/taxonomy.h"

namespace markerkit {

/// One corpus row.
struct SampleRecord {
  std::string id;
  std::string prompt;
  std::string completion;
  std::string language = std::string(kUnspecifiedLanguage);
  std::optional<double> quality_score;
  /// Raw category values known from the source dataset, keyed by tag name.
  std::map<std::string, std::string, std::less<>> metadata;
  /// Markers carried by an already-tagged corpus.
  std::optional<MarkerList> gold_markers;
};

}  // namespace markerkit

#endif  // MARKERKIT_SAMPLE_H_

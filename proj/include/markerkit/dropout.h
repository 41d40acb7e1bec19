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

// Prompt-side marker dropout.
//
// Dataset-level: the whole prompt-side list is removed for a fraction of
// records. Sample-level: in the remaining records each marker is removed
// independently with probability `sample_rate`. The completion side never
// goes through dropout.
//
// Every draw is a pure function of (seed, record id[, tag name]), so results
// do not depend on processing order or thread count.

#ifndef MARKERKIT_DROPOUT_H_
#define MARKERKIT_DROPOUT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markerkit/expected.h"
#include "markerkit/taxonomy.h"

namespace markerkit {

struct DropoutConfig {
  double dataset_rate = 0.5;
  double sample_rate = 0.5;
  std::uint64_t seed = 0;

  std::optional<std::string> validate() const;
};

/// Presets named `<dataset%>_<sample%>`: "0_50", "50_50", "70_50".
Expected<DropoutConfig, std::string> dropout_preset(std::string_view name,
                                                    std::uint64_t seed);

struct DropoutDecision {
  std::string record_id;
  bool dataset_dropped = false;
  std::vector<std::string> kept_categories;  // empty when dataset_dropped
};

/// Uniform draw in [0, 1) derived from (seed, record_id, salt).
double dropout_draw(std::uint64_t seed, std::string_view record_id,
                    std::string_view salt);

DropoutDecision decide(std::string_view record_id, const MarkerList& markers,
                       const DropoutConfig& cfg);

MarkerList apply_prompt_dropout(const MarkerList& markers,
                                const DropoutDecision& decision);

}  // namespace markerkit

#endif  // MARKERKIT_DROPOUT_H_

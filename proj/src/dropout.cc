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

#include "markerkit/dropout.h"

#include <algorithm>
#include <cmath>

namespace markerkit {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool valid_rate(double r) { return std::isfinite(r) && r >= 0.0 && r <= 1.0; }

}  // namespace

std::optional<std::string> DropoutConfig::validate() const {
  if (!valid_rate(dataset_rate)) return "dataset_rate must be within [0, 1]";
  if (!valid_rate(sample_rate)) return "sample_rate must be within [0, 1]";
  return std::nullopt;
}

Expected<DropoutConfig, std::string> dropout_preset(std::string_view name,
                                                    std::uint64_t seed) {
  if (name == "0_50") return DropoutConfig{0.0, 0.5, seed};
  if (name == "50_50") return DropoutConfig{0.5, 0.5, seed};
  if (name == "70_50") return DropoutConfig{0.7, 0.5, seed};
  return unexpected("unknown dropout preset '" + std::string(name) +
                    "' (expected 0_50, 50_50 or 70_50)");
}

double dropout_draw(std::uint64_t seed, std::string_view record_id,
                    std::string_view salt) {
  // Length-prefix the id so ("ab", "c") and ("a", "bc") hash differently.
  std::uint64_t h = fnv1a(kFnvOffset, std::to_string(record_id.size()));
  h = fnv1a(h, ":");
  h = fnv1a(h, record_id);
  h = fnv1a(h, "|");
  h = fnv1a(h, salt);
  std::uint64_t mixed = splitmix64(splitmix64(seed) ^ h);
  return static_cast<double>(mixed >> 11) * 0x1.0p-53;
}

DropoutDecision decide(std::string_view record_id, const MarkerList& markers,
                       const DropoutConfig& cfg) {
  DropoutDecision d;
  d.record_id = std::string(record_id);
  if (dropout_draw(cfg.seed, record_id, "") < cfg.dataset_rate) {
    d.dataset_dropped = true;
    return d;
  }
  for (const auto& [tag, _] : markers) {
    if (dropout_draw(cfg.seed, record_id, tag) >= cfg.sample_rate) {
      d.kept_categories.push_back(tag);
    }
  }
  return d;
}

MarkerList apply_prompt_dropout(const MarkerList& markers,
                                const DropoutDecision& decision) {
  MarkerList out;
  if (decision.dataset_dropped) return out;
  for (const auto& [tag, marker] : markers) {
    if (std::find(decision.kept_categories.begin(),
                  decision.kept_categories.end(),
                  tag) != decision.kept_categories.end()) {
      out.insert(marker);
    }
  }
  return out;
}

}  // namespace markerkit

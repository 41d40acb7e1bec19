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


#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "generators.h"
#include "markerkit/dropout.h"

namespace markerkit {
namespace {

MarkerList full_list() {
  MarkerList m;
  m.set(enum_marker("domain", "Code"));
  m.set(enum_marker("task", "CodeFix"));
  m.set(enum_marker("language", "English"));
  m.set(integer_marker("length_tokens", 42));
  m.set(enum_marker("length_bucket", "concise"));
  return m;
}

TEST_CASE("presets") {
  auto p = dropout_preset("0_50", 9);
  REQUIRE(p);
  CHECK(p->dataset_rate == 0.0);
  CHECK(p->sample_rate == 0.5);
  CHECK(p->seed == 9);
  CHECK(dropout_preset("50_50", 1)->dataset_rate == 0.5);
  CHECK(dropout_preset("70_50", 1)->dataset_rate == 0.7);
  CHECK(dropout_preset("70_50", 1)->sample_rate == 0.5);
  CHECK_FALSE(dropout_preset("30_30", 1));
}

TEST_CASE("rate validation") {
  CHECK_FALSE(DropoutConfig{0.5, 0.5, 1}.validate());
  CHECK(DropoutConfig{-0.1, 0.5, 1}.validate());
  CHECK(DropoutConfig{0.5, 1.5, 1}.validate());
  CHECK(DropoutConfig{std::nan(""), 0.5, 1}.validate());
}

TEST_CASE("certain and impossible rates") {
  MarkerList m = full_list();
  for (int i = 0; i < 500; ++i) {
    std::string id = "rec-" + std::to_string(i);
    DropoutDecision all = decide(id, m, DropoutConfig{1.0, 0.0, 7});
    CHECK(all.dataset_dropped);
    CHECK(all.kept_categories.empty());
    CHECK(apply_prompt_dropout(m, all).empty());

    DropoutDecision none = decide(id, m, DropoutConfig{0.0, 0.0, 7});
    CHECK_FALSE(none.dataset_dropped);
    CHECK(apply_prompt_dropout(m, none) == m);

    DropoutDecision every = decide(id, m, DropoutConfig{0.0, 1.0, 7});
    CHECK(apply_prompt_dropout(m, every).empty());
  }
}

TEST_CASE("draws lie in [0, 1) and look uniform") {
  std::vector<int> bins(10, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double d = dropout_draw(123, std::to_string(i), "domain");
    REQUIRE(d >= 0.0);
    REQUIRE(d < 1.0);
    ++bins[static_cast<std::size_t>(d * 10)];
  }
  // Chi-square with 9 degrees of freedom; 27.88 is the 0.999 quantile.
  double chi = 0;
  for (int b : bins) chi += (b - n / 10.0) * (b - n / 10.0) / (n / 10.0);
  CHECK(chi < 27.88);
}

TEST_CASE("id framing separates concatenations") {
  CHECK(dropout_draw(1, "ab", "c") != dropout_draw(1, "a", "bc"));
}

TEST_CASE("apply_prompt_dropout filters, nests and is idempotent") {
  MarkerList m = full_list();
  DropoutDecision d;
  d.record_id = "x";
  d.kept_categories = {"domain", "task"};
  MarkerList once = apply_prompt_dropout(m, d);
  CHECK(once.categories() == std::vector<std::string>{"domain", "task"});
  CHECK(apply_prompt_dropout(once, d) == once);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    MarkerList random = testing::random_marker_list(rng);
    DropoutDecision dec =
        decide(std::to_string(i), random, DropoutConfig{0.3, 0.5, rng()});
    MarkerList kept = apply_prompt_dropout(random, dec);
    CHECK(kept.is_subset_of(random));
    if (dec.dataset_dropped) CHECK(dec.kept_categories.empty());
    CHECK(apply_prompt_dropout(kept, dec) == kept);
  }
}

TEST_CASE("decisions do not depend on order or threads") {
  MarkerList m = full_list();
  DropoutConfig cfg{0.5, 0.5, 42};
  const int n = 2000;
  std::vector<DropoutDecision> forward(n);
  for (int i = 0; i < n; ++i) forward[i] = decide(std::to_string(i), m, cfg);

  std::vector<DropoutDecision> threaded(n);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 8; ++w) {
      pool.emplace_back([&, w] {
        for (int i = n - 1 - w; i >= 0; i -= 8) {
          threaded[i] = decide(std::to_string(i), m, cfg);
        }
      });
    }
  }
  for (int i = 0; i < n; ++i) {
    CHECK(forward[i].dataset_dropped == threaded[i].dataset_dropped);
    CHECK(forward[i].kept_categories == threaded[i].kept_categories);
  }
}

TEST_CASE("changing the seed changes decisions") {
  MarkerList m = full_list();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
      auto a = decide(std::to_string(i), m, DropoutConfig{0.5, 0.5, seed});
      auto b = decide(std::to_string(i), m, DropoutConfig{0.5, 0.5, seed + 1});
      if (a.dataset_dropped != b.dataset_dropped ||
          a.kept_categories != b.kept_categories) {
        ++differing;
      }
    }
    CHECK(differing > 0);
  }
}

TEST_CASE("empirical rates converge") {
  MarkerList m = full_list();
  for (double dataset_rate : {0.0, 0.5, 0.7}) {
    CAPTURE(dataset_rate);
    DropoutConfig cfg{dataset_rate, 0.5, 42};
    const int n = 10000;
    int dropped = 0;
    long kept_markers = 0;
    long offered = 0;
    for (int i = 0; i < n; ++i) {
      auto d = decide("sample-" + std::to_string(i), m, cfg);
      if (d.dataset_dropped) {
        ++dropped;
        continue;
      }
      offered += static_cast<long>(m.size());
      kept_markers += static_cast<long>(d.kept_categories.size());
    }
    double drop_fraction = static_cast<double>(dropped) / n;
    double keep_fraction = static_cast<double>(kept_markers) / static_cast<double>(offered);
    if (dataset_rate == 0.0) {
      CHECK(dropped == 0);
    } else {
      CHECK(std::abs(drop_fraction - dataset_rate) <= 0.02);
    }
    CHECK(std::abs(keep_fraction - 0.5) <= 0.02);
  }
}

}  // namespace
}  // namespace markerkit

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
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "markerkit/annotate.h"
#include "scripted_transport.h"

namespace markerkit {
namespace {

using testing::ok;
using testing::ScriptedTransport;

TEST_CASE("token counts") {
  CHECK(count_tokens("a b  c", "English") == 3);
  CHECK(count_tokens("", "French") == 0);
  CHECK(count_tokens("   \n\t ", "English") == 0);
  CHECK(count_tokens("你好 world", "Chinese") == 3);
  CHECK(count_tokens("你好 world", "English") == 2);
  // 5 kana + 2 Han, one scalar each.
  CHECK(count_tokens("こんにちは世界", "Japanese") == 7);
  // Mixed run: "abc" before and "def" after the Han scalar are words.
  CHECK(count_tokens("abc中def", "Chinese") == 3);
  // No-break space and ideographic space separate tokens.
  CHECK(count_tokens("one two　three", "English") == 3);
}

TEST_CASE("sentence counts") {
  CHECK(count_sentences("Hi. Bye!", "English") == 2);
  CHECK(count_sentences("No terminator", "English") == 1);
  CHECK(count_sentences("", "English") == 0);
  CHECK(count_sentences("  \n ", "English") == 0);
  CHECK(count_sentences("Pi is 3.14 today.", "English") == 1);
  CHECK(count_sentences("Wait... what?! Fine", "English") == 3);
  CHECK(count_sentences("你好。再见！", "Chinese") == 2);
  CHECK(count_sentences("مرحبا؟ نعم", "Arabic") == 2);
  CHECK(count_sentences("Hmm… ok.", "English") == 2);
}

TEST_CASE("paragraph counts") {
  CHECK(count_paragraphs("a\n\nb") == 2);
  CHECK(count_paragraphs("a\nb") == 1);
  CHECK(count_paragraphs("a\n\n\n\nb\n\n") == 2);
  CHECK(count_paragraphs("") == 0);
  CHECK(count_paragraphs("\n\n\n") == 0);
  CHECK(count_paragraphs("x") == 1);
}

TEST_CASE("length bucket boundaries") {
  const std::pair<std::int64_t, LengthBucket> cases[] = {
      {0, LengthBucket::kConcise},     {1, LengthBucket::kConcise},
      {299, LengthBucket::kConcise},   {300, LengthBucket::kMedium},
      {1000, LengthBucket::kMedium},   {1001, LengthBucket::kLong},
      {1000000, LengthBucket::kLong}};
  for (const auto& [n, bucket] : cases) {
    CAPTURE(n);
    CHECK(length_bucket(n) == bucket);
  }
  CHECK(to_string(LengthBucket::kMedium) == "medium");
}

TEST_CASE("counts are deterministic across threads") {
  std::string text = "One. Two three!\n\nFour 五六七。 eight";
  TextStats reference = text_stats(text, "Chinese");
  std::vector<TextStats> seen(8);
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < 8; ++i) {
      pool.emplace_back([&, i] { seen[i] = text_stats(text, "Chinese"); });
    }
  }
  for (const auto& s : seen) {
    CHECK(s.token_count == reference.token_count);
    CHECK(s.sentence_count == reference.sentence_count);
    CHECK(s.paragraph_count == reference.paragraph_count);
  }
}

TEST_CASE("custom tokenizer is used for length markers") {
  SampleRecord r;
  r.prompt = "p";
  r.completion = "abcdef";
  Tokenizer by_char = [](std::string_view t, std::string_view) {
    return static_cast<std::int64_t>(t.size());
  };
  MarkerList m = annotate_deterministic(r, nullptr, nullptr, by_char);
  CHECK(m.find("length_tokens")->render() == "6");
}

// Nearest-rank percentile computed independently of the library.
double oracle_rank(std::vector<double> scores, int percent) {
  std::sort(scores.begin(), scores.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(static_cast<double>(percent) * static_cast<double>(scores.size()) / 100.0));
  return scores[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<std::pair<std::string, double>> tagged(const std::string& lang,
                                                   const std::vector<double>& v) {
  std::vector<std::pair<std::string, double>> out;
  for (double d : v) out.emplace_back(lang, d);
  return out;
}

TEST_CASE("quartile table examples") {
  auto small = tagged("English", {1, 2, 3, 4});
  QuartileTable t = build_quartile_table(small);
  REQUIRE(t.contains("English"));
  const auto& q = *t.find("English");
  CHECK(q.q1 == 1);
  CHECK(q.q2 == 2);
  CHECK(q.q3 == 3);
  CHECK(q.p95 == 4);
  CHECK(q.sample_count == 4);

  auto lone = tagged("French", {5});
  CHECK_FALSE(build_quartile_table(lone).contains("French"));

  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  auto samples = tagged("English", hundred);
  QuartileTable big = build_quartile_table(samples);
  const auto& b = *big.find("English");
  CHECK(b.q1 == 25);
  CHECK(b.q2 == 50);
  CHECK(b.q3 == 75);
  CHECK(b.p95 == 95);
  CHECK(b.max == 100);
  // Bucket 1 holds 76..100; the 24th of those 25 is 99.
  REQUIRE(b.bucket_p95[0]);
  CHECK(*b.bucket_p95[0] == 99);
  CHECK(b.bucket_counts[0] == 25);

  CHECK(quality_bucket(95, "English", big).value() == 1);
  CHECK(quality_bucket(75, "English", big).value() == 2);
  CHECK(quality_bucket(50, "English", big).value() == 3);
  CHECK(quality_bucket(25, "English", big).value() == 4);
  CHECK(quality_bucket(-5, "English", big).value() == 4);
  CHECK(quality_bucket(50, "Greek", big).error() == QualityError::kUnknownLanguage);
}

TEST_CASE("quartiles match a sort-based oracle on random score sets") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 4 + rng() % 60;
    std::vector<double> scores(n);
    bool coarse = trial % 3 == 0;  // force ties on a third of the trials
    for (auto& s : scores) {
      s = coarse ? static_cast<double>(rng() % 5)
                 : std::uniform_real_distribution<double>(0, 1)(rng);
    }
    auto samples = tagged("Korean", scores);
    QuartileTable t = build_quartile_table(samples);
    const auto& q = *t.find("Korean");
    CHECK(q.q1 == oracle_rank(scores, 25));
    CHECK(q.q2 == oracle_rank(scores, 50));
    CHECK(q.q3 == oracle_rank(scores, 75));
    CHECK(q.p95 == oracle_rank(scores, 95));
    CHECK(q.max == *std::max_element(scores.begin(), scores.end()));

    // Bucket populations and per-bucket p95 against brute force.
    std::vector<double> members[4];
    for (double s : scores) {
      int b = s > q.q3 ? 1 : s > q.q2 ? 2 : s > q.q1 ? 3 : 4;
      CHECK(quality_bucket(s, "Korean", t).value() == b);
      members[b - 1].push_back(s);
    }
    for (int b = 0; b < 4; ++b) {
      CHECK(q.bucket_counts[b] == static_cast<std::int64_t>(members[b].size()));
      if (members[b].empty()) {
        CHECK_FALSE(q.bucket_p95[b]);
      } else {
        REQUIRE(q.bucket_p95[b]);
        CHECK(*q.bucket_p95[b] == oracle_rank(members[b], 95));
      }
    }
  }
}

TEST_CASE("quartile table JSON round trip") {
  std::vector<double> v{0.1, 0.4, 0.4, 0.9, 0.95, 0.2};
  auto samples = tagged("Dutch", v);
  QuartileTable t = build_quartile_table(samples);
  auto back = QuartileTable::from_json(t.to_json());
  REQUIRE(back);
  CHECK(back->to_json() == t.to_json());
  CHECK_FALSE(QuartileTable::from_json("[]"));
  CHECK_FALSE(QuartileTable::from_json("{\"languages\":{\"Dutch\":{}}}"));
}

SampleRecord record(std::string completion, std::string language = "English") {
  SampleRecord r;
  r.id = "r";
  r.prompt = "prompt";
  r.completion = std::move(completion);
  r.language = std::move(language);
  return r;
}

MarkerList list_of(std::initializer_list<std::pair<const char*, const char*>> kv) {
  MarkerList out;
  for (const auto& [k, v] : kv) out.set(validate_marker(k, v).value());
  return out;
}

TEST_CASE("deterministic annotation") {
  CHECK(annotate_deterministic(record("Hi. Bye!"), nullptr) ==
        list_of({{"language", "English"},
                 {"length_tokens", "2"},
                 {"length_sent", "2"},
                 {"length_para", "1"},
                 {"length_bucket", "concise"}}));

  SampleRecord synthetic = record("x");
  synthetic.metadata["source"] = "Synthetic";
  synthetic.metadata["style"] = "Formal";
  synthetic.metadata["code_type"] = "rust";
  CHECK(annotate_deterministic(synthetic, nullptr).find("source")->render() ==
        "Synthetic");

  SampleRecord unknown = record("x", "Unspecified");
  CHECK_FALSE(annotate_deterministic(unknown, nullptr).contains("language"));

  std::vector<double> scores{1, 2, 3, 4};
  auto samples = tagged("English", scores);
  QuartileTable table = build_quartile_table(samples);
  SampleRecord scored = record("x");
  scored.quality_score = 3.123456;
  MarkerList with_quality = annotate_deterministic(scored, &table);
  CHECK(with_quality.find("quality")->render() == "3.1235");
  CHECK(with_quality.find("quality_bucket")->render() == "1");

  SampleRecord foreign = record("x", "Greek");
  foreign.quality_score = 2;
  std::vector<std::string> warnings;
  MarkerList none = annotate_deterministic(foreign, &table, &warnings);
  CHECK_FALSE(none.contains("quality"));
  CHECK_FALSE(none.contains("quality_bucket"));
  CHECK(warnings.size() == 1);
}

TEST_CASE("metadata problems become warnings") {
  SampleRecord r = record("x");
  r.metadata["source"] = "Crawled";
  r.metadata["length_tokens"] = "5000";
  r.metadata["publisher"] = "acme";
  std::vector<std::string> warnings;
  MarkerList m = annotate_deterministic(r, nullptr, &warnings);
  CHECK_FALSE(m.contains("source"));
  CHECK(m.find("length_tokens")->render() == "1");
  CHECK(warnings.size() >= 2);
}

TEST_CASE("deterministic annotation emits only valid markers") {
  std::mt19937 rng(3);
  const std::string words[] = {"alpha", "beta.", "γάμμα!", "中文", "\n\n", " ", "?"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 40); ++k) text += words[rng() % 7] + " ";
    MarkerList m = annotate_deterministic(record(text), nullptr);
    for (const auto& [tag, marker] : m) {
      auto again = validate_marker(tag, marker.render());
      REQUIRE(again);
      CHECK(*again == marker);
    }
    auto tokens = std::get<std::int64_t>(m.find("length_tokens")->value());
    CHECK(m.find("length_bucket")->render() == to_string(length_bucket(tokens)));
  }
}

TEST_CASE("classification prompt fills the final slot") {
  auto prompt = build_classification_prompt("task", "Translate 'cat' to French.");
  REQUIRE(prompt);
  const std::string tail = "Prompt : Translate 'cat' to French.\nAnswer : ";
  CHECK(prompt->substr(prompt->size() - tail.size()) == tail);
  CHECK(prompt->find("Use ABC notation") == std::string::npos);
  CHECK(prompt->find("You are a helpful assistant whose goal is to classify") == 0);
  CHECK(build_classification_prompt("domain", "q"));
  CHECK(build_classification_prompt("format", "q"));
  CHECK_FALSE(build_classification_prompt("style", "q"));
}

TEST_CASE("reply normalization") {
  CHECK(normalize_class_reply("  `CreativeWriting`\n") == "CreativeWriting");
  CHECK(normalize_class_reply("\"Code\"") == "Code");
  CHECK(normalize_class_reply("'Math'") == "Math");
  CHECK(normalize_class_reply("Reasoning") == "Reasoning");
}

TEST_CASE("LLM annotation") {
  SUBCASE("backticked class") {
    auto t = std::make_shared<ScriptedTransport>(
        [](const HttpRequest&, int) { return ok("`CreativeWriting`"); });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"task"};
    auto a = annotate_with_llm(
        "Use ABC notation to write a melody in the style of a folk tune.", cats, client);
    CHECK(a.markers == list_of({{"task", "CreativeWriting"}}));
    CHECK(a.warnings.empty());
    REQUIRE(t->calls() == 1);
    auto body = nlohmann::json::parse(t->requests()[0].body);
    CHECK(body["temperature"] == 0.0);
  }
  SUBCASE("Unspecified abstains") {
    auto t = std::make_shared<ScriptedTransport>(
        [](const HttpRequest&, int) { return ok("Unspecified"); });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"domain"};
    auto a = annotate_with_llm("anything", cats, client);
    CHECK(a.markers.empty());
    CHECK(a.warnings.empty());
    CHECK(t->calls() == 1);
  }
  SUBCASE("invalid twice abstains with a warning") {
    auto t = std::make_shared<ScriptedTransport>(
        [](const HttpRequest&, int) { return ok("NotAClass"); });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"format"};
    auto a = annotate_with_llm("anything", cats, client);
    CHECK(a.markers.empty());
    CHECK(a.warnings.size() == 1);
    CHECK(t->calls() == 2);
  }
  SUBCASE("invalid then valid") {
    auto t = std::make_shared<ScriptedTransport>([](const HttpRequest&, int i) {
      return ok(i == 0 ? "Poetry" : "JSON");
    });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"format"};
    auto a = annotate_with_llm("anything", cats, client);
    CHECK(a.markers == list_of({{"format", "JSON"}}));
    CHECK(a.warnings.empty());
  }
  SUBCASE("spaced class names are joined") {
    auto t = std::make_shared<ScriptedTransport>(
        [](const HttpRequest&, int) { return ok("`Social Sciences`"); });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"domain"};
    CHECK(annotate_with_llm("q", cats, client).markers ==
          list_of({{"domain", "SocialSciences"}}));
  }
  SUBCASE("each category gets its own prompt") {
    auto t = std::make_shared<ScriptedTransport>([](const HttpRequest& r, int) {
      std::string user = testing::user_content(r);
      if (user.find("`Sciences`") != std::string::npos &&
          user.find("[`Sciences`") != std::string::npos) {
        return ok("Code");
      }
      if (user.find("`QuestionAnswering`") != std::string::npos) return ok("CodeFix");
      return ok("Markdown");
    });
    LlmClient client = testing::scripted_client(t);
    std::vector<std::string> cats{"domain", "task", "format"};
    auto a = annotate_with_llm("Fix my loop", cats, client);
    CHECK(a.markers.size() == 3);
    CHECK(a.markers.find("format")->render() == "Markdown");
    CHECK(t->calls() == 3);
  }
  SUBCASE("transport failure abstains with a warning") {
    auto t = std::make_shared<ScriptedTransport>(
        [](const HttpRequest&, int) { return testing::status(500); });
    EndpointConfig cfg = testing::test_endpoint();
    cfg.max_retries = 1;
    LlmClient client = testing::scripted_client(t, cfg);
    std::vector<std::string> cats{"domain"};
    auto a = annotate_with_llm("q", cats, client);
    CHECK(a.markers.empty());
    REQUIRE(a.warnings.size() == 1);
    CHECK(a.warnings[0].find("exhausted_retries") != std::string::npos);
  }
}

}  // namespace
}  // namespace markerkit

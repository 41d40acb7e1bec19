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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "markerkit/taxonomy.h"

namespace markerkit {
namespace {

// Independent copy of the published taxonomy table. Integer and decimal rows
// carry no value list.
const std::map<std::string, std::vector<std::string>>& reference_table() {
  static const std::map<std::string, std::vector<std::string>> kTable = {
      {"quality", {}},
      {"quality_bucket", {"1", "2", "3", "4"}},
      {"length_tokens", {}},
      {"length_sent", {}},
      {"length_para", {}},
      {"length_bucket", {"concise", "medium", "long"}},
      {"task",
       {"OpenEnded", "Explanation", "Translation", "Classification",
        "CreativeWriting", "QuestionAnswering", "InformationExtraction",
        "Summarization", "Rewrite", "Reasoning", "CodeGeneration", "CodeFix",
        "CodeTranslation", "CodeExplanation"}},
      {"domain",
       {"Sciences", "Technology", "SocialSciences", "Culture", "Medical",
        "Legal", "Unspecified", "Conversation", "Code", "Math"}},
      {"code_type",
       {"python", "javascript", "cpp", "cobol", "java", "go", "rust", "swift",
        "csharp", "php", "typescript", "shell", "c", "kotlin", "ruby",
        "haskell", "sql"}},
      {"format",
       {"MCQAnswer", "ChainOfThought", "XML", "JSON", "Enumeration", "Tabular",
        "Markdown", "Latex"}},
      {"source", {"Human", "Translation", "Synthetic", "Others"}},
      {"style", {"Formal", "Informal", "Custom"}},
      {"language",
       {"Arabic", "Chinese", "Czech", "Dutch", "English", "French", "German",
        "Greek", "Hebrew", "Hindi", "Indonesian", "Italian", "Japanese",
        "Korean", "Persian", "Polish", "Portuguese", "Romanian", "Russian",
        "Spanish", "Turkish", "Ukrainian", "Vietnamese"}},
  };
  return kTable;
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

TEST_CASE("registry has the thirteen published categories in tag order") {
  auto cats = list_categories();
  REQUIRE(cats.size() == 13);
  CHECK(cats.front().tag_name == "code_type");
  std::vector<std::string> names;
  for (const auto& c : cats) names.push_back(c.tag_name);
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
  for (const auto& [tag, _] : reference_table()) {
    CHECK_MESSAGE(std::find(names.begin(), names.end(), tag) != names.end(), tag);
  }
}

TEST_CASE("value lists match the reference table") {
  for (const auto& spec : list_categories()) {
    CAPTURE(spec.tag_name);
    const auto& expected = reference_table().at(spec.tag_name);
    CHECK(as_set(spec.allowed_values) == as_set(expected));
    CHECK(spec.allowed_values.size() == expected.size());
    bool enumerated = spec.value_kind == ValueKind::kEnum ||
                      spec.value_kind == ValueKind::kLanguageEnum;
    CHECK(enumerated == !spec.allowed_values.empty());
    CHECK_FALSE(spec.description.empty());
  }
}

TEST_CASE("published category shapes") {
  auto task = category_spec("task");
  REQUIRE(task);
  CHECK((*task)->allowed_values.size() == 14);
  CHECK((*task)->allowed_values.front() == "OpenEnded");
  CHECK((*task)->allowed_values.back() == "CodeExplanation");

  auto bucket = category_spec("length_bucket");
  REQUIRE(bucket);
  CHECK(as_set((*bucket)->allowed_values) ==
        std::set<std::string>{"concise", "medium", "long"});

  auto language = category_spec("language");
  REQUIRE(language);
  CHECK((*language)->value_kind == ValueKind::kLanguageEnum);
  CHECK((*language)->allowed_values.size() == 23);
  CHECK(supported_languages().size() == 23);

  auto para = category_spec("length_para");
  REQUIRE(para);
  CHECK((*para)->value_kind == ValueKind::kInteger);

  auto style = category_spec("style");
  REQUIRE(style);
  CHECK(as_set((*style)->allowed_values) ==
        std::set<std::string>{"Formal", "Informal", "Custom"});

  auto quality = category_spec("quality");
  REQUIRE(quality);
  CHECK((*quality)->value_kind == ValueKind::kDecimal);
}

TEST_CASE("unknown categories are rejected") {
  auto spec = category_spec("mood");
  REQUIRE_FALSE(spec);
  CHECK(spec.error().code == RejectionCode::kUnknownCategory);
  auto marker = validate_marker("mood", "happy");
  REQUIRE_FALSE(marker);
  CHECK(marker.error().code == RejectionCode::kUnknownCategory);
}

TEST_CASE("validate_marker on published values") {
  auto domain = validate_marker("domain", "Sciences");
  REQUIRE(domain);
  CHECK(domain->category() == "domain");
  CHECK(domain->render() == "Sciences");

  auto tokens = validate_marker("length_tokens", "199");
  REQUIRE(tokens);
  CHECK(std::get<std::int64_t>(tokens->value()) == 199);

  auto bad_bucket = validate_marker("quality_bucket", "5");
  REQUIRE_FALSE(bad_bucket);
  CHECK(bad_bucket.error().code == RejectionCode::kValueNotAllowed);
}

TEST_CASE("validate_marker rejection kinds") {
  CHECK(validate_marker("length_tokens", "12a").error().code ==
        RejectionCode::kWrongKind);
  CHECK(validate_marker("length_tokens", "-3").error().code ==
        RejectionCode::kWrongKind);
  CHECK(validate_marker("length_tokens", "").error().code ==
        RejectionCode::kWrongKind);
  CHECK(validate_marker("length_tokens", "99999999999999999999").error().code ==
        RejectionCode::kValueNotAllowed);
  CHECK(validate_marker("quality", "high").error().code ==
        RejectionCode::kWrongKind);
  CHECK(validate_marker("quality", "inf").error().code ==
        RejectionCode::kValueNotAllowed);
  CHECK(validate_marker("quality", "nan").error().code ==
        RejectionCode::kValueNotAllowed);
  CHECK(validate_marker("quality", "1e999").error().code ==
        RejectionCode::kValueNotAllowed);
  // Enum spellings are exact.
  CHECK(validate_marker("task", "creativewriting").error().code ==
        RejectionCode::kValueNotAllowed);
  CHECK(validate_marker("code_type", "CPP").error().code ==
        RejectionCode::kValueNotAllowed);
  CHECK(validate_marker("language", "Unspecified").error().code ==
        RejectionCode::kValueNotAllowed);
}

TEST_CASE("alias tags resolve to canonical names") {
  CHECK(canonical_tag("lang") == "language");
  CHECK(canonical_tag("length_sentences") == "length_sent");
  CHECK(canonical_tag("length_paragraphs") == "length_para");
  CHECK(canonical_tag("domain") == "domain");
  auto m = validate_marker("lang", "English");
  REQUIRE(m);
  CHECK(m->category() == "language");
}

TEST_CASE("every allowed value validates and renders to itself") {
  for (const auto& spec : list_categories()) {
    for (const auto& v : spec.allowed_values) {
      auto m = validate_marker(spec.tag_name, v);
      REQUIRE_MESSAGE(m, spec.tag_name << "=" << v);
      CHECK(m->render() == v);
    }
  }
}

TEST_CASE("decimal rendering round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1000.0, 1000.0);
  for (int i = 0; i < 2000; ++i) {
    double d = dist(rng);
    Marker m = decimal_marker("quality", d);
    auto back = validate_marker("quality", m.render());
    REQUIRE(back);
    CHECK(*back == m);
  }
  CHECK(decimal_marker("quality", 0.5).render() == "0.5");
  CHECK(decimal_marker("quality", 99.0).render() == "99");
}

TEST_CASE("validate_marker is total over arbitrary text") {
  std::mt19937 rng(5);
  const std::string alphabet = "aZ09 .-_<>/\n\t`\"eE+";
  std::vector<std::string> tags;
  for (const auto& s : list_categories()) tags.push_back(s.tag_name);
  tags.push_back("lang");
  tags.push_back("");
  tags.push_back("bogus");
  for (int i = 0; i < 5000; ++i) {
    std::string value;
    int len = static_cast<int>(rng() % 8);
    for (int k = 0; k < len; ++k) value += alphabet[rng() % alphabet.size()];
    const std::string& tag = tags[rng() % tags.size()];
    auto m = validate_marker(tag, value);
    if (m) {
      CHECK(validate_marker(m->category(), m->render()));
    } else {
      CHECK_FALSE(m.error().detail.empty());
    }
  }
}

TEST_CASE("builders throw on programming errors") {
  CHECK_THROWS_AS(enum_marker("domain", "Finance"), std::invalid_argument);
  CHECK_THROWS_AS(integer_marker("domain", 3), std::invalid_argument);
  CHECK_THROWS_AS(decimal_marker("quality", std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
  CHECK_NOTHROW(integer_marker("length_sent", 5));
}

TEST_CASE("MarkerList keeps one marker per category in tag order") {
  MarkerList list;
  CHECK(list.insert(enum_marker("task", "Reasoning")));
  CHECK(list.insert(enum_marker("domain", "Math")));
  CHECK_FALSE(list.insert(enum_marker("domain", "Code")));
  CHECK(list.find("domain")->render() == "Math");
  list.set(enum_marker("domain", "Code"));
  CHECK(list.find("domain")->render() == "Code");
  CHECK(list.categories() == std::vector<std::string>{"domain", "task"});
  CHECK(list.size() == 2);

  MarkerList sub;
  sub.set(enum_marker("task", "Reasoning"));
  CHECK(sub.is_subset_of(list));
  CHECK_FALSE(list.is_subset_of(sub));
  sub.set(enum_marker("task", "Rewrite"));
  CHECK_FALSE(sub.is_subset_of(list));

  CHECK(list.erase("task"));
  CHECK_FALSE(list.erase("task"));
  CHECK_FALSE(list.contains("task"));
}

}  // namespace
}  // namespace markerkit

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
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "generators.h"
#include "markerkit/markup.h"

namespace markerkit {
namespace {

MarkerList list_of(std::initializer_list<std::pair<const char*, const char*>> kv) {
  MarkerList out;
  for (const auto& [k, v] : kv) {
    auto m = validate_marker(k, v);
    REQUIRE(m);
    out.set(*m);
  }
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

TEST_CASE("serialize canonical examples") {
  CHECK(serialize_marker_list(list_of({{"language", "French"}, {"domain", "Sciences"}})) ==
        "<MARKER_LIST>\n<domain>Sciences</domain>\n<language>French</language>\n"
        "</MARKER_LIST>");
  CHECK(serialize_marker_list(MarkerList{}) == "<MARKER_LIST>\n</MARKER_LIST>");
}

TEST_CASE("serialize reproduces the published four-marker block") {
  MarkerList m = list_of({{"task", "QuestionAnswering"},
                          {"length_tokens", "199"},
                          {"domain", "Culture"},
                          {"length_bucket", "concise"}});
  CHECK(lines_of(serialize_marker_list(m)) ==
        std::vector<std::string>{"<MARKER_LIST>", "<domain>Culture</domain>",
                                 "<length_bucket>concise</length_bucket>",
                                 "<length_tokens>199</length_tokens>",
                                 "<task>QuestionAnswering</task>",
                                 "</MARKER_LIST>"});
}

TEST_CASE("strict parse of published and trivial blocks") {
  auto parsed = parse_marker_list(
      "<MARKER_LIST>\n<length_tokens>199</length_tokens>\n</MARKER_LIST>");
  REQUIRE(parsed);
  CHECK(*parsed == list_of({{"length_tokens", "199"}}));

  auto empty = parse_marker_list("  <MARKER_LIST>\n</MARKER_LIST>\n\n");
  REQUIRE(empty);
  CHECK(empty->empty());

  auto aliased = parse_marker_list(
      "<MARKER_LIST>\n<lang>German</lang>\n<length_sentences>5</length_sentences>\n"
      "</MARKER_LIST>");
  REQUIRE(aliased);
  CHECK(*aliased == list_of({{"language", "German"}, {"length_sent", "5"}}));
}

TEST_CASE("strict parse rejections") {
  auto code = [](std::string_view text) {
    auto r = parse_marker_list(text);
    REQUIRE_FALSE(r);
    return r.error().code;
  };
  CHECK(code("<MARKER_LIST>\n<domain>Sciences</domain>\n<domain>Math</domain>\n"
             "</MARKER_LIST>") == ParseErrorCode::kDuplicateCategory);
  CHECK(code("<MARKER_LIST>\n<domain>Sciences</domain>\n<lang>English</lang>\n"
             "<language>French</language>\n</MARKER_LIST>") ==
        ParseErrorCode::kDuplicateCategory);
  CHECK(code("hello") == ParseErrorCode::kNotABlock);
  CHECK(code("") == ParseErrorCode::kNotABlock);
  CHECK(code("x <MARKER_LIST>\n</MARKER_LIST>") == ParseErrorCode::kNotABlock);
  CHECK(code("<MARKER_LIST>\n</MARKER_LIST>\ntrailing") == ParseErrorCode::kNotABlock);
  CHECK(code("<MARKER_LIST>\n<MARKER_LIST>\n</MARKER_LIST>\n</MARKER_LIST>") ==
        ParseErrorCode::kNotABlock);
  CHECK(code("<MARKER_LIST>\n<domain>Code\n</MARKER_LIST>") ==
        ParseErrorCode::kMalformedEntry);
  CHECK(code("<MARKER_LIST>\n<domain>Code</task>\n</MARKER_LIST>") ==
        ParseErrorCode::kMalformedEntry);
  CHECK(code("<MARKER_LIST>\nfree text\n</MARKER_LIST>") ==
        ParseErrorCode::kMalformedEntry);
  CHECK(code("<MARKER_LIST>\n<bogus>1</bogus>\n</MARKER_LIST>") ==
        ParseErrorCode::kUnknownCategory);
  CHECK(code("<MARKER_LIST>\n<domain>Finance</domain>\n</MARKER_LIST>") ==
        ParseErrorCode::kInvalidValue);
  CHECK(code("<MARKER_LIST>\n<length_tokens>many</length_tokens>\n</MARKER_LIST>") ==
        ParseErrorCode::kInvalidValue);
}

TEST_CASE("lenient parse keeps valid entries and reports the rest") {
  auto alias = parse_lenient("<MARKER_LIST>\n<lang>English</lang>\n</MARKER_LIST>");
  REQUIRE(alias);
  CHECK(alias->markers == list_of({{"language", "English"}}));
  CHECK(alias->dropped.empty());

  auto abstain =
      parse_lenient("<MARKER_LIST>\n<domain>Unspecified</domain>\n</MARKER_LIST>");
  REQUIRE(abstain);
  CHECK(abstain->markers.empty());
  REQUIRE(abstain->dropped.size() == 1);
  CHECK(abstain->dropped[0].tag == "domain");
  CHECK(abstain->dropped[0].value == "Unspecified");
  CHECK(abstain->dropped[0].reason == "abstention");

  auto bogus = parse_lenient(
      "<MARKER_LIST>\n<domain>Sciences</domain>\n<bogus>1</bogus>\n</MARKER_LIST>");
  REQUIRE(bogus);
  CHECK(bogus->markers == list_of({{"domain", "Sciences"}}));
  REQUIRE(bogus->dropped.size() == 1);
  CHECK(bogus->dropped[0].tag == "bogus");
}

TEST_CASE("lenient parse tolerates annotator formatting") {
  auto r = parse_lenient(
      "Here you go:\n```\n<MARKER_LIST><domain>`Code`</domain> <task> \"CodeFix\" </task>\n"
      "<domain>Math</domain>\n<length_tokens>ten</length_tokens>\n/MARKER_LIST>\n```");
  REQUIRE(r);
  CHECK(r->markers == list_of({{"domain", "Code"}, {"task", "CodeFix"}}));
  CHECK(r->dropped.size() == 2);

  auto empty = parse_lenient("```<MARKER_LIST></MARKER_LIST>```");
  REQUIRE(empty);
  CHECK(empty->markers.empty());
  CHECK(empty->dropped.empty());

  auto none = parse_lenient("I cannot tag this.");
  REQUIRE_FALSE(none);
  CHECK(none.error().code == ParseErrorCode::kNotABlock);
}

TEST_CASE("extract_first_block spec examples") {
  std::string block = serialize_marker_list(list_of({{"language", "French"}}));
  Extraction a = extract_first_block(block + "\nBonjour.");
  REQUIRE(a.block);
  CHECK(a.block->markers == list_of({{"language", "French"}}));
  CHECK(a.block->raw_text == block);
  CHECK(a.remainder == "Bonjour.");

  Extraction b = extract_first_block("Bonjour.");
  CHECK_FALSE(b.block);
  CHECK(b.remainder == "Bonjour.");

  Extraction c = extract_first_block(
      "```\n<MARKER_LIST>\n<task>Reasoning</task>\n</MARKER_LIST>\n```");
  REQUIRE(c.block);
  CHECK(c.block->markers == list_of({{"task", "Reasoning"}}));
  CHECK(c.remainder == "```\n```");

  Extraction half = extract_first_block("<MARKER_LIST>\n<domain>Code");
  CHECK_FALSE(half.block);
  CHECK(half.remainder == "<MARKER_LIST>\n<domain>Code");

  Extraction trailing = extract_first_block("Answer\n" + block);
  REQUIRE(trailing.block);
  CHECK(trailing.remainder == "Answer");
  CHECK(trailing.removed_separator == 1);
}

TEST_CASE("round trip over random lists") {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 2000; ++i) {
    MarkerList m = testing::random_marker_list(rng);
    std::string text = serialize_marker_list(m);
    auto back = parse_marker_list(text);
    REQUIRE(back);
    CHECK(*back == m);
    CHECK(serialize_marker_list(*back) == text);
    std::vector<std::string> lines = lines_of(text);
    REQUIRE(lines.size() == m.size() + 2);
    CHECK(std::is_sorted(lines.begin() + 1, lines.end() - 1));
  }
}

TEST_CASE("extraction never loses host bytes") {
  std::mt19937_64 rng(99);
  const std::string pieces[] = {"", "\n", "text", "\n\n", "``` ", "<MARK", "é\n"};
  for (int i = 0; i < 2000; ++i) {
    std::string before = pieces[rng() % 7] + pieces[rng() % 7];
    std::string after = pieces[rng() % 7] + pieces[rng() % 7];
    std::string block = serialize_marker_list(testing::random_marker_list(rng));
    std::string host = before + block + after;
    Extraction ex = extract_first_block(host);
    REQUIRE(ex.block);
    CHECK(ex.remainder.size() + ex.block->raw_text.size() + ex.removed_separator ==
          host.size());
    CHECK(host.substr(ex.block->begin, ex.block->end - ex.block->begin) ==
          ex.block->raw_text);
    // Oracle: cut the span and one adjacent newline by hand.
    std::string expect_before = before;
    std::string expect_after = after;
    if (!expect_after.empty() && expect_after.front() == '\n') {
      expect_after.erase(0, 1);
    } else if (!expect_before.empty() && expect_before.back() == '\n') {
      expect_before.pop_back();
    }
    if (before.find("<MARKER_LIST>") == std::string::npos) {
      CHECK(ex.remainder == expect_before + expect_after);
    }
  }
}

}  // namespace
}  // namespace markerkit

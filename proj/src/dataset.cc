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

#include "markerkit/dataset.h"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "markerkit/markup.h"

namespace markerkit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Expected<std::string, IoError> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return unexpected(IoError{path, std::strerror(errno)});
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return unexpected(IoError{path, "read failed"});
  return ss.str();
}

Expected<std::monostate, IoError> write_file(const std::string& path,
                                             std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return unexpected(IoError{path, std::strerror(errno)});
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) return unexpected(IoError{path, "write failed"});
  return std::monostate{};
}

ordered_json markers_to_json(const MarkerList& markers) {
  ordered_json out = ordered_json::object();
  for (const auto& [tag, marker] : markers) out[tag] = marker.render();
  return out;
}

Expected<MarkerList, std::string> markers_from_json(const json& j) {
  if (!j.is_object()) return unexpected(std::string("markers must be an object"));
  MarkerList out;
  for (const auto& [key, value] : j.items()) {
    std::string raw;
    if (value.is_string()) {
      raw = value.get<std::string>();
    } else if (value.is_number()) {
      raw = value.dump();
    } else {
      return unexpected("marker '" + key + "' must be a string or number");
    }
    auto marker = validate_marker(key, raw);
    if (!marker) {
      return unexpected(std::string(to_string(marker.error().code)) + ": " +
                        marker.error().detail);
    }
    std::string tag = marker->category();
    if (!out.insert(std::move(marker).value())) {
      return unexpected("duplicate category '" + tag + "'");
    }
  }
  return out;
}

Expected<SampleRecord, std::string> parse_sample(
    std::string_view line, std::size_t ordinal,
    std::vector<std::string>* warnings) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return unexpected(std::string("invalid JSON"));
  if (!doc.is_object()) return unexpected(std::string("record is not an object"));

  SampleRecord r;
  if (auto it = doc.find("id"); it != doc.end() && !it->is_null()) {
    if (it->is_string()) {
      r.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      r.id = it->dump();
    } else {
      return unexpected(std::string("'id' must be a string or integer"));
    }
  } else {
    r.id = std::to_string(ordinal);
  }

  for (auto [field, target] : {std::pair{"prompt", &r.prompt},
                               std::pair{"completion", &r.completion}}) {
    auto it = doc.find(field);
    if (it == doc.end() || !it->is_string()) {
      return unexpected(std::string("'") + field + "' must be a string");
    }
    *target = it->get<std::string>();
    if (target->empty()) {
      return unexpected(std::string("'") + field + "' is empty");
    }
  }

  auto lang = doc.find("language");
  if (lang == doc.end() || lang->is_null()) {
    if (warnings != nullptr) {
      warnings->push_back("record " + r.id +
                          ": no language, using Unspecified");
    }
  } else if (!lang->is_string()) {
    return unexpected(std::string("'language' must be a string"));
  } else {
    r.language = lang->get<std::string>();
    auto langs = supported_languages();
    if (r.language != kUnspecifiedLanguage &&
        std::find(langs.begin(), langs.end(), r.language) == langs.end()) {
      return unexpected("unsupported language '" + r.language + "'");
    }
  }

  if (auto it = doc.find("quality_score"); it != doc.end() && !it->is_null()) {
    if (!it->is_number()) {
      return unexpected(std::string("'quality_score' must be a number"));
    }
    r.quality_score = it->get<double>();
  }

  if (auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) {
      return unexpected(std::string("'metadata' must be an object"));
    }
    for (const auto& [key, value] : it->items()) {
      if (value.is_string()) {
        r.metadata.emplace(key, value.get<std::string>());
      } else if (value.is_number()) {
        r.metadata.emplace(key, value.dump());
      } else if (!value.is_null()) {
        return unexpected("metadata '" + key + "' must be a string or number");
      }
    }
  }

  if (auto it = doc.find("gold_markers"); it != doc.end() && !it->is_null()) {
    auto markers = markers_from_json(*it);
    if (!markers) return unexpected("gold_markers: " + markers.error());
    r.gold_markers = std::move(markers).value();
  }
  return r;
}

LoadResult load_samples_from_string(std::string_view text) {
  LoadResult out;
  std::size_t ordinal = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto record = parse_sample(line, ordinal++, &out.warnings);
    if (record) {
      out.records.push_back(std::move(record).value());
    } else {
      out.errors.push_back({line_no, record.error()});
    }
  });
  if (ordinal == 0) out.warnings.push_back("input is empty");
  return out;
}

Expected<LoadResult, IoError> load_samples(const std::string& path) {
  auto text = read_file(path);
  if (!text) return unexpected(text.error());
  return load_samples_from_string(*text);
}

TrainingExample build_training_example(const SampleRecord& record,
                                       const MarkerList& gold,
                                       const DropoutConfig& cfg) {
  TrainingExample ex;
  ex.record_id = record.id;
  ex.gold_markers = gold;
  ex.prompt_markers = apply_prompt_dropout(gold, decide(record.id, gold, cfg));
  ex.input_text = record.prompt;
  if (!ex.prompt_markers.empty()) {
    ex.input_text += '\n';
    ex.input_text += serialize_marker_list(ex.prompt_markers);
  }
  ex.target_text = serialize_marker_list(gold);
  ex.target_text += '\n';
  ex.target_text += record.completion;
  return ex;
}

std::string format_example(const TrainingExample& example) {
  ordered_json j;
  j["input_text"] = example.input_text;
  j["target_text"] = example.target_text;
  j["gold_markers"] = markers_to_json(example.gold_markers);
  j["prompt_markers"] = markers_to_json(example.prompt_markers);
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Expected<std::size_t, IoError> write_dataset(
    const std::vector<TrainingExample>& examples, const std::string& path) {
  std::string content;
  for (const auto& ex : examples) {
    content += format_example(ex);
    content += '\n';
  }
  auto written = write_file(path, content);
  if (!written) return unexpected(written.error());
  return examples.size();
}

StatsReport dataset_stats(const std::vector<MarkerList>& marker_lists,
                          double long_tail_threshold_percent) {
  StatsReport report;
  report.total_records = static_cast<std::int64_t>(marker_lists.size());
  report.long_tail_threshold_percent = long_tail_threshold_percent;

  std::map<std::string, std::map<std::string, std::int64_t>> counts;
  for (const auto& list : marker_lists) {
    for (const auto& [tag, marker] : list) ++counts[tag][marker.render()];
  }
  for (auto& [tag, values] : counts) {
    CategoryHistogram h;
    h.category = tag;
    for (const auto& [_, n] : values) h.present += n;
    for (const auto& [value, n] : values) {
      ValueShare share{value, n, 100.0 * static_cast<double>(n) /
                                     static_cast<double>(h.present)};
      if (static_cast<double>(n) * 100.0 <=
          long_tail_threshold_percent * static_cast<double>(h.present)) {
        h.long_tail.push_back(value);
      }
      h.values.push_back(std::move(share));
    }
    std::stable_sort(h.values.begin(), h.values.end(),
                     [](const ValueShare& a, const ValueShare& b) {
                       return a.count > b.count;
                     });
    report.categories.push_back(std::move(h));
  }
  return report;
}

ordered_json StatsReport::to_json() const {
  ordered_json j;
  j["total_records"] = total_records;
  j["long_tail_threshold_percent"] = long_tail_threshold_percent;
  ordered_json cats = ordered_json::object();
  for (const auto& h : categories) {
    ordered_json c;
    c["present"] = h.present;
    ordered_json values = ordered_json::array();
    for (const auto& v : h.values) {
      values.push_back(
          {{"value", v.value}, {"count", v.count}, {"percent", v.percent}});
    }
    c["values"] = std::move(values);
    c["long_tail"] = h.long_tail;
    cats[h.category] = std::move(c);
  }
  j["categories"] = std::move(cats);
  return j;
}

std::string StatsReport::to_table() const {
  std::size_t width = 8;
  for (const auto& h : categories) {
    for (const auto& v : h.values) width = std::max(width, v.value.size());
  }
  std::ostringstream out;
  out << "records: " << total_records << "\n";
  for (const auto& h : categories) {
    out << "\n" << h.category << " (" << h.present << " records)\n";
    for (const auto& v : h.values) {
      bool tail = std::find(h.long_tail.begin(), h.long_tail.end(), v.value) !=
                  h.long_tail.end();
      out << "  " << std::left << std::setw(static_cast<int>(width)) << v.value
          << std::right << std::setw(10) << v.count << std::setw(9)
          << std::fixed << std::setprecision(2) << v.percent << "%"
          << (tail ? "  long-tail" : "") << "\n";
    }
  }
  return out.str();
}

}  // namespace markerkit

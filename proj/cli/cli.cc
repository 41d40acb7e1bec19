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


#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "markerkit/annotate.h"
#include "markerkit/dataset.h"
#include "markerkit/dropout.h"
#include "markerkit/evalsuite.h"
#include "markerkit/inference.h"
#include "markerkit/markup.h"
#include "markerkit/parallel.h"
#include "markerkit/taxonomy.h"

namespace markerkit::cli {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Aborts the command with exit status 2.
struct Fatal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::optional<std::string> input;
  std::optional<std::string> output;
  std::optional<std::string> quartiles;
  std::optional<double> dataset_rate;
  std::optional<double> sample_rate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dropout_preset;
  std::vector<std::string> llm_categories;
  std::optional<EndpointConfig> annotator;
  std::optional<EndpointConfig> judge;
  std::optional<EndpointConfig> generator;
};

void check_keys(const json& section, std::string_view name,
                std::initializer_list<std::string_view> allowed) {
  if (!section.is_object()) {
    throw Fatal("config: '" + std::string(name) + "' must be an object");
  }
  for (const auto& [key, _] : section.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Fatal("config: unknown key '" + std::string(name) + "." + key + "'");
    }
  }
}

EndpointConfig parse_endpoint(const json& j, std::string_view name) {
  check_keys(j, name,
             {"base_url", "model_name", "api_key_env", "timeout_seconds",
              "max_retries", "max_in_flight", "temperature",
              "initial_backoff_seconds", "backoff_multiplier",
              "max_backoff_seconds"});
  EndpointConfig cfg;
  cfg.base_url = j.value("base_url", cfg.base_url);
  cfg.model_name = j.value("model_name", cfg.model_name);
  cfg.api_key_env = j.value("api_key_env", cfg.api_key_env);
  cfg.timeout_seconds = j.value("timeout_seconds", cfg.timeout_seconds);
  cfg.max_retries = j.value("max_retries", cfg.max_retries);
  cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
  cfg.temperature = j.value("temperature", cfg.temperature);
  cfg.initial_backoff_seconds =
      j.value("initial_backoff_seconds", cfg.initial_backoff_seconds);
  cfg.backoff_multiplier = j.value("backoff_multiplier", cfg.backoff_multiplier);
  cfg.max_backoff_seconds = j.value("max_backoff_seconds", cfg.max_backoff_seconds);
  if (auto problem = cfg.validate()) {
    throw Fatal("config: " + std::string(name) + ": " + *problem);
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  if (path.empty()) return cfg;
  auto text = read_file(path);
  if (!text) throw Fatal(path + ": " + text.error().message);
  json doc = json::parse(*text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Fatal(path + ": config is not a JSON object");
  }
  try {
    check_keys(doc, "config",
               {"io", "dropout", "annotate", "annotator", "judge", "generator"});
    if (auto it = doc.find("io"); it != doc.end()) {
      check_keys(*it, "io", {"input", "output", "quartiles"});
      if (it->contains("input")) cfg.input = it->at("input").get<std::string>();
      if (it->contains("output")) cfg.output = it->at("output").get<std::string>();
      if (it->contains("quartiles")) {
        cfg.quartiles = it->at("quartiles").get<std::string>();
      }
    }
    if (auto it = doc.find("dropout"); it != doc.end()) {
      check_keys(*it, "dropout", {"dataset_rate", "sample_rate", "seed", "preset"});
      if (it->contains("dataset_rate")) {
        cfg.dataset_rate = it->at("dataset_rate").get<double>();
      }
      if (it->contains("sample_rate")) {
        cfg.sample_rate = it->at("sample_rate").get<double>();
      }
      if (it->contains("seed")) {
        const json& s = it->at("seed");
        if (!s.is_number_unsigned()) {
          throw Fatal("config: dropout.seed must be a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
      }
      if (it->contains("preset")) {
        cfg.dropout_preset = it->at("preset").get<std::string>();
      }
    }
    if (auto it = doc.find("annotate"); it != doc.end()) {
      check_keys(*it, "annotate", {"llm_categories", "quartiles"});
      if (it->contains("llm_categories")) {
        cfg.llm_categories =
            it->at("llm_categories").get<std::vector<std::string>>();
      }
      if (it->contains("quartiles") && !cfg.quartiles) {
        cfg.quartiles = it->at("quartiles").get<std::string>();
      }
    }
    if (auto it = doc.find("annotator"); it != doc.end()) {
      cfg.annotator = parse_endpoint(*it, "annotator");
    }
    if (auto it = doc.find("judge"); it != doc.end()) {
      cfg.judge = parse_endpoint(*it, "judge");
    }
    if (auto it = doc.find("generator"); it != doc.end()) {
      cfg.generator = parse_endpoint(*it, "generator");
    }
  } catch (const json::exception& e) {
    throw Fatal(path + ": " + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Shared plumbing

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Environment& env;
  PipelineConfig config;
  std::mutex err_mu;
  bool partial = false;

  void warn(const std::string& message) {
    std::lock_guard lock(err_mu);
    err << "warning: " << message << "\n";
  }
  void fail(const std::string& message) {
    std::lock_guard lock(err_mu);
    err << "error: " << message << "\n";
    partial = true;
  }
};

struct CommonOptions {
  std::string config_path;
  std::string input;
  std::string output;
  std::size_t jobs = 1;
};

void add_io(CLI::App* sub, CommonOptions& o, bool with_output = true) {
  sub->add_option("--config", o.config_path, "Pipeline config file (JSON)");
  sub->add_option("--in", o.input, "Input JSON Lines file");
  if (with_output) {
    sub->add_option("--out", o.output, "Output file (default: standard output)");
  }
}

void add_jobs(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

std::string resolve_input(const CommonOptions& o, const PipelineConfig& cfg) {
  std::string path = o.input.empty() ? cfg.input.value_or("") : o.input;
  if (path.empty()) throw Fatal("no input file (--in or io.input)");
  if (!std::filesystem::is_regular_file(path)) {
    throw Fatal(path + ": no such file");
  }
  return path;
}

std::string resolve_output(const CommonOptions& o, const PipelineConfig& cfg,
                           const std::string& input) {
  std::string path = o.output.empty() ? cfg.output.value_or("") : o.output;
  if (!path.empty() && !input.empty()) {
    std::error_code ec;
    if (std::filesystem::equivalent(path, input, ec)) {
      throw Fatal(path + ": output would overwrite the input file");
    }
  }
  return path;
}

void emit(Context& ctx, const std::string& path, const std::string& content) {
  if (path.empty()) {
    ctx.out << content;
    ctx.out.flush();
    return;
  }
  auto written = write_file(path, content);
  if (!written) throw Fatal(path + ": " + written.error().message);
}

std::string read_input(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw Fatal(path + ": " + text.error().message);
  return std::move(text).value();
}

struct InputLine {
  std::size_t line_no = 0;
  std::size_t ordinal = 0;
  json value;
};

// Parses JSON Lines into objects; bad lines are reported and skipped.
std::vector<InputLine> read_json_lines(Context& ctx, const std::string& path) {
  std::string text = read_input(path);
  std::vector<InputLine> out;
  std::size_t ordinal = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    json j = json::parse(line, nullptr, false);
    std::size_t this_ordinal = ordinal++;
    if (j.is_discarded() || !j.is_object()) {
      ctx.fail(path + ":" + std::to_string(line_no) + ": not a JSON object");
      return;
    }
    out.push_back({line_no, this_ordinal, std::move(j)});
  });
  return out;
}

std::string record_id(const InputLine& line) {
  auto it = line.value.find("id");
  if (it == line.value.end() || it->is_null()) return std::to_string(line.ordinal);
  return it->is_string() ? it->get<std::string>() : it->dump();
}

std::optional<QuartileTable> load_quartiles(const std::string& flag,
                                            const PipelineConfig& cfg) {
  std::string path = flag.empty() ? cfg.quartiles.value_or("") : flag;
  if (path.empty()) return std::nullopt;
  auto table = QuartileTable::from_json(read_input(path));
  if (!table) throw Fatal(path + ": " + table.error());
  return std::move(table).value();
}

std::unique_ptr<LlmClient> make_client(Context& ctx, std::string_view section,
                                       const std::optional<EndpointConfig>& cfg) {
  if (!cfg) {
    throw Fatal("config has no '" + std::string(section) + "' endpoint section");
  }
  std::shared_ptr<Transport> transport = ctx.env.transport_factory
                                             ? ctx.env.transport_factory(section)
                                             : make_http_transport();
  LlmClient::Options options;
  options.sleeper = ctx.env.sleeper;
  options.key_resolver = ctx.env.key_resolver;
  std::string prefix = std::string(section) + ": ";
  options.diagnostics = [&ctx, prefix](std::string_view message) {
    std::lock_guard lock(ctx.err_mu);
    ctx.err << prefix << message << "\n";
  };
  return std::make_unique<LlmClient>(*cfg, std::move(transport), std::move(options));
}

std::size_t client_jobs(const CommonOptions& o, const LlmClient& client) {
  return std::min<std::size_t>(
      o.jobs, static_cast<std::size_t>(client.config().max_in_flight));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ordered_json sample_to_json(const SampleRecord& r, const MarkerList& gold) {
  ordered_json j;
  j["id"] = r.id;
  j["prompt"] = r.prompt;
  j["completion"] = r.completion;
  j["language"] = r.language;
  if (r.quality_score) j["quality_score"] = *r.quality_score;
  if (!r.metadata.empty()) j["metadata"] = r.metadata;
  j["gold_markers"] = markers_to_json(gold);
  return j;
}

// Loads a corpus, reporting malformed lines as partial failures.
std::vector<SampleRecord> load_corpus(Context& ctx, const std::string& path) {
  LoadResult loaded = load_samples_from_string(read_input(path));
  for (const auto& w : loaded.warnings) ctx.warn(path + ": " + w);
  for (const auto& e : loaded.errors) {
    ctx.fail(path + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return std::move(loaded.records);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_taxonomy(Context& ctx, const std::string& format) {
  if (format == "table") {
    std::ostringstream t;
    for (const auto& spec : list_categories()) {
      t << spec.tag_name << " (" << to_string(spec.value_kind) << ")";
      if (!spec.allowed_values.empty() &&
          spec.value_kind != ValueKind::kLanguageEnum) {
        t << ":";
        for (const auto& v : spec.allowed_values) t << " " << v;
      } else if (spec.value_kind == ValueKind::kLanguageEnum) {
        t << ": " << spec.allowed_values.size() << " languages";
      }
      t << "\n  " << spec.description << "\n";
    }
    ctx.out << t.str();
    return kExitOk;
  }
  ordered_json cats = ordered_json::array();
  for (const auto& spec : list_categories()) {
    ordered_json c;
    c["tag_name"] = spec.tag_name;
    c["value_kind"] = to_string(spec.value_kind);
    c["allowed_values"] = spec.allowed_values;
    c["description"] = spec.description;
    cats.push_back(std::move(c));
  }
  ordered_json doc;
  doc["categories"] = std::move(cats);
  ctx.out << dump(doc) << "\n";
  return kExitOk;
}

struct TagOptions {
  std::string quartiles;
  bool llm = false;
  std::string categories;
};

int cmd_tag(Context& ctx, const CommonOptions& o, const TagOptions& t) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  auto table = load_quartiles(t.quartiles, ctx.config);

  std::vector<std::string> categories =
      t.categories.empty() ? ctx.config.llm_categories : split_list(t.categories);
  if (categories.empty()) {
    categories.assign(kLlmCategories.begin(), kLlmCategories.end());
  }
  for (const auto& c : categories) {
    if (std::find(kLlmCategories.begin(), kLlmCategories.end(), c) ==
        kLlmCategories.end()) {
      throw Fatal("category '" + c + "' cannot be annotated by the LLM");
    }
  }
  std::unique_ptr<LlmClient> client;
  if (t.llm) client = make_client(ctx, "annotator", ctx.config.annotator);

  std::vector<SampleRecord> records = load_corpus(ctx, in);
  std::vector<std::string> lines(records.size());
  std::size_t jobs = client ? client_jobs(o, *client) : o.jobs;
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const SampleRecord& r = records[i];
    MarkerList gold = r.gold_markers.value_or(MarkerList{});
    std::vector<std::string> warnings;
    for (const auto& [tag, marker] : annotate_deterministic(
             r, table ? &*table : nullptr, &warnings)) {
      gold.set(marker);
    }
    if (client) {
      std::vector<std::string> missing;
      for (const auto& c : categories) {
        if (!gold.contains(c)) missing.push_back(c);
      }
      if (!missing.empty()) {
        LlmAnnotation a = annotate_with_llm(r.prompt, missing, *client);
        for (const auto& [tag, marker] : a.markers) gold.set(marker);
        warnings.insert(warnings.end(), a.warnings.begin(), a.warnings.end());
      }
    }
    for (const auto& w : warnings) ctx.warn("record " + r.id + ": " + w);
    lines[i] = dump(sample_to_json(r, gold));
  });
  std::string content;
  for (const auto& l : lines) content += l + "\n";
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

int cmd_quartiles(Context& ctx, const CommonOptions& o) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  std::vector<std::pair<std::string, double>> scored;
  std::map<std::string, std::int64_t> per_language;
  for (const auto& r : load_corpus(ctx, in)) {
    if (!r.quality_score || r.language == kUnspecifiedLanguage) continue;
    scored.emplace_back(r.language, *r.quality_score);
    ++per_language[r.language];
  }
  QuartileTable table = build_quartile_table(scored);
  for (const auto& [language, n] : per_language) {
    if (!table.contains(language)) {
      ctx.warn(language + ": only " + std::to_string(n) +
               " scored records, no quartiles");
    }
  }
  emit(ctx, out_path, table.to_json() + "\n");
  return ctx.partial ? kExitPartial : kExitOk;
}

struct BuildOptions {
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::string quartiles;
};

DropoutConfig resolve_dropout(const PipelineConfig& cfg, const BuildOptions& b) {
  std::optional<std::uint64_t> seed = b.seed ? b.seed : cfg.seed;
  if (!seed) {
    throw Fatal("build needs a seed (--seed or dropout.seed in the config)");
  }
  std::string preset = b.preset.empty() ? cfg.dropout_preset.value_or("") : b.preset;
  DropoutConfig d;
  if (!preset.empty()) {
    auto p = dropout_preset(preset, *seed);
    if (!p) throw Fatal(p.error());
    d = *p;
  } else {
    d.seed = *seed;
    if (cfg.dataset_rate) d.dataset_rate = *cfg.dataset_rate;
    if (cfg.sample_rate) d.sample_rate = *cfg.sample_rate;
  }
  if (auto problem = d.validate()) throw Fatal("dropout: " + *problem);
  return d;
}

int cmd_build(Context& ctx, const CommonOptions& o, const BuildOptions& b) {
  DropoutConfig dropout = resolve_dropout(ctx.config, b);
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  auto table = load_quartiles(b.quartiles, ctx.config);

  std::vector<SampleRecord> records = load_corpus(ctx, in);
  std::vector<std::string> lines(records.size());
  parallel_for(records.size(), o.jobs, [&](std::size_t i) {
    const SampleRecord& r = records[i];
    MarkerList gold;
    if (r.gold_markers) {
      gold = *r.gold_markers;
    } else {
      std::vector<std::string> warnings;
      gold = annotate_deterministic(r, table ? &*table : nullptr, &warnings);
      for (const auto& w : warnings) ctx.warn("record " + r.id + ": " + w);
    }
    lines[i] = format_example(build_training_example(r, gold, dropout));
  });
  std::string content;
  for (const auto& l : lines) content += l + "\n";
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

void emit_report(Context& ctx, const std::string& path, const std::string& format,
                 const ordered_json& j, const std::string& table) {
  std::string content;
  if (format == "json" || format == "both") content += dump(j) + "\n";
  if (format == "both") content += "\n";
  if (format == "table" || format == "both") content += table;
  emit(ctx, path, content);
}

int cmd_stats(Context& ctx, const CommonOptions& o, double threshold,
              const std::string& format) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  std::vector<MarkerList> lists;
  for (const auto& line : read_json_lines(ctx, in)) {
    auto it = line.value.find("gold_markers");
    if (it == line.value.end()) {
      ctx.fail(in + ":" + std::to_string(line.line_no) + ": no gold_markers");
      continue;
    }
    auto markers = markers_from_json(*it);
    if (!markers) {
      ctx.fail(in + ":" + std::to_string(line.line_no) + ": " + markers.error());
      continue;
    }
    lists.push_back(std::move(markers).value());
  }
  StatsReport report = dataset_stats(lists, threshold);
  emit_report(ctx, out_path, format, report.to_json(), report.to_table());
  return ctx.partial ? kExitPartial : kExitOk;
}

std::optional<std::string> string_field(const InputLine& line,
                                        std::string_view name) {
  auto it = line.value.find(name);
  if (it == line.value.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

struct InjectOptions {
  std::string markers;
  std::optional<int> quality_bucket;
  std::string language;
  std::string quartiles;
};

int cmd_inject(Context& ctx, const CommonOptions& o, const InjectOptions& opt) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  MarkerList global;
  if (!opt.markers.empty()) {
    json j = json::parse(opt.markers, nullptr, false);
    if (j.is_discarded()) throw Fatal("--markers is not valid JSON");
    auto m = markers_from_json(j);
    if (!m) throw Fatal("--markers: " + m.error());
    global = std::move(m).value();
  }
  std::optional<QuartileTable> table;
  if (opt.quality_bucket) {
    table = load_quartiles(opt.quartiles, ctx.config);
    if (!table) throw Fatal("--quality-bucket needs a quartile table");
  }

  std::string content;
  for (const auto& line : read_json_lines(ctx, in)) {
    std::string where = in + ":" + std::to_string(line.line_no) + ": ";
    auto prompt = string_field(line, "prompt");
    if (!prompt) {
      ctx.fail(where + "'prompt' must be a string");
      continue;
    }
    MarkerList markers = global;
    if (auto it = line.value.find("markers"); it != line.value.end()) {
      auto m = markers_from_json(*it);
      if (!m) {
        ctx.fail(where + m.error());
        continue;
      }
      for (const auto& [tag, marker] : *m) markers.set(marker);
    }
    if (opt.quality_bucket) {
      std::string language =
          string_field(line, "language").value_or(opt.language);
      auto anchor = quality_anchor(*opt.quality_bucket, language, *table);
      if (!anchor) {
        ctx.fail(where + "quality anchor for '" + language +
                 "': " + std::string(to_string(anchor.error())));
        continue;
      }
      for (const auto& [tag, marker] : *anchor) markers.set(marker);
    }
    auto plan = InferencePlan::fixed(markers);
    if (!plan) {
      ctx.fail(where + plan.error());
      continue;
    }
    ordered_json j;
    j["id"] = record_id(line);
    j["prompt"] = plan->prepare(*prompt).prompt;
    j["markers"] = markers_to_json(markers);
    content += dump(j) + "\n";
  }
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

int cmd_rewrite(Context& ctx, const CommonOptions& o) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  std::string content;
  for (const auto& line : read_json_lines(ctx, in)) {
    auto prompt = string_field(line, "prompt");
    if (!prompt) {
      ctx.fail(in + ":" + std::to_string(line.line_no) +
               ": 'prompt' must be a string");
      continue;
    }
    ordered_json j;
    j["id"] = record_id(line);
    auto rw = rewrite_length_instructed(*prompt);
    if (rw) {
      j["prompt"] = inject_fixed(rw->stripped_prompt, rw->markers);
      j["rewritten"] = true;
      j["constraint"] = {{"kind", to_string(rw->kind)}, {"limit", rw->limit}};
      j["markers"] = markers_to_json(rw->markers);
    } else {
      j["prompt"] = *prompt;
      j["rewritten"] = false;
    }
    j["original_prompt"] = *prompt;
    content += dump(j) + "\n";
  }
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

int cmd_annotate_fly(Context& ctx, const CommonOptions& o) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  auto client = make_client(ctx, "annotator", ctx.config.annotator);
  auto plan = InferencePlan::on_the_fly(client.get());
  if (!plan) throw Fatal(plan.error());

  std::vector<InputLine> lines = read_json_lines(ctx, in);
  std::vector<std::optional<std::string>> rendered(lines.size());
  parallel_for(lines.size(), client_jobs(o, *client), [&](std::size_t i) {
    const InputLine& line = lines[i];
    auto prompt = string_field(line, "prompt");
    if (!prompt) {
      ctx.fail(in + ":" + std::to_string(line.line_no) +
               ": 'prompt' must be a string");
      return;
    }
    std::string id = record_id(line);
    OnTheFlyResult r = annotate_on_the_fly(*prompt, *client);
    for (const auto& w : r.warnings) ctx.warn("record " + id + ": " + w);
    ordered_json j;
    j["id"] = id;
    j["prompt"] = r.prompt;
    j["original_prompt"] = *prompt;
    j["markers"] = markers_to_json(r.appended);
    j["warnings"] = r.warnings;
    rendered[i] = dump(j);
  });
  std::string content;
  for (const auto& r : rendered) {
    if (r) content += *r + "\n";
  }
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

int cmd_strip(Context& ctx, const CommonOptions& o, bool generate) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  std::unique_ptr<LlmClient> client;
  if (generate) client = make_client(ctx, "generator", ctx.config.generator);

  std::vector<InputLine> lines = read_json_lines(ctx, in);
  std::vector<std::optional<std::string>> rendered(lines.size());
  std::size_t jobs = client ? client_jobs(o, *client) : o.jobs;
  parallel_for(lines.size(), jobs, [&](std::size_t i) {
    const InputLine& line = lines[i];
    std::string where = in + ":" + std::to_string(line.line_no) + ": ";
    std::optional<std::string> raw = string_field(line, "generation");
    if (!raw && client) {
      auto prompt = string_field(line, "prompt");
      if (!prompt) {
        ctx.fail(where + "needs 'generation' or 'prompt'");
        return;
      }
      CompletionRequest request;
      request.user = *prompt;
      auto response = client->complete(request);
      if (!response) {
        ctx.fail(where + "generation failed: " + response.error().message);
        return;
      }
      raw = response->text;
    }
    if (!raw) {
      ctx.fail(where + "'generation' must be a string");
      return;
    }
    GenerationOutcome g = strip_output(*raw);
    ordered_json j;
    j["id"] = record_id(line);
    j["inferred_markers"] = markers_to_json(g.inferred_markers);
    j["completion"] = g.visible_completion;
    if (client) j["generation"] = g.raw_output;
    rendered[i] = dump(j);
  });
  std::string content;
  for (const auto& r : rendered) {
    if (r) content += *r + "\n";
  }
  emit(ctx, out_path, content);
  return ctx.partial ? kExitPartial : kExitOk;
}

struct EvalOptions {
  std::string metric;
  std::string format = "both";
  std::string categories;
  bool judge = false;
};

int cmd_eval(Context& ctx, const CommonOptions& o, const EvalOptions& e) {
  std::string in = resolve_input(o, ctx.config);
  std::string out_path = resolve_output(o, ctx.config, in);
  std::unique_ptr<LlmClient> judge;
  if (e.judge) {
    if (e.metric != "winrate") throw Fatal("--judge only applies to winrate");
    judge = make_client(ctx, "judge", ctx.config.judge);
  }

  std::vector<EvalRecord> records;
  std::string text = read_input(in);
  std::size_t ordinal = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    auto r = parse_eval_record(line, ordinal++);
    if (!r) {
      ctx.fail(in + ":" + std::to_string(line_no) + ": " + r.error());
      return;
    }
    records.push_back(std::move(r).value());
  });

  if (judge) {
    parallel_for(records.size(), client_jobs(o, *judge), [&](std::size_t i) {
      EvalRecord& r = records[i];
      if (r.judge_verdict || !r.baseline) return;
      std::string failure;
      r.judge_verdict = judge_pairwise(r.prompt, r.generation.visible_completion,
                                       *r.baseline, *judge, &failure);
      if (!r.judge_verdict) ctx.fail("record " + r.id + ": judge failed: " + failure);
    });
  }

  Expected<EvalReport, EvalError> report =
      unexpected(EvalError{EvalErrorCode::kEmptyInput, "no metric"});
  if (e.metric == "violation") {
    report = violation_rate(records);
  } else if (e.metric == "lpr") {
    auto id = labeled_language_id(records);
    if (!id) throw Fatal("line labels: " + id.error());
    report = line_pass_rate(records, *id);
  } else if (e.metric == "marker-acc") {
    std::vector<std::string> categories = split_list(e.categories);
    if (categories.empty()) {
      std::set<std::string> seen;
      for (const auto& r : records) {
        if (!r.gold_markers) continue;
        for (const auto& [tag, _] : *r.gold_markers) seen.insert(tag);
      }
      categories.assign(seen.begin(), seen.end());
    }
    for (const auto& c : categories) {
      if (!category_spec(c)) throw Fatal("unknown category '" + c + "'");
    }
    report = marker_accuracy(std::span<const EvalRecord>(records), categories);
  } else if (e.metric == "winrate") {
    report = win_rate(records);
  }
  if (!report) {
    throw Fatal(e.metric + ": " + std::string(to_string(report.error().code)) +
                ": " + report.error().message);
  }
  emit_report(ctx, out_path, e.format, report->to_json(), report->to_table());
  return ctx.partial ? kExitPartial : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const Environment& env) {
  CLI::App app("Marker-annotated instruction data: tagging, dataset "
               "construction, inference helpers and evaluation.",
               "markers");
  app.require_subcommand(1);

  CommonOptions common;
  std::string taxonomy_format = "json";
  TagOptions tag;
  BuildOptions build;
  std::uint64_t build_seed = 0;
  double stats_threshold = 5.0;
  std::string stats_format = "json";
  InjectOptions inject;
  int quality_bucket = 0;
  bool generate = false;
  EvalOptions eval;

  auto* taxonomy = app.add_subcommand("taxonomy", "Print the marker taxonomy");
  taxonomy->add_option("--format", taxonomy_format)
      ->check(CLI::IsMember({"json", "table"}));

  auto* tag_cmd = app.add_subcommand("tag", "Annotate a corpus with gold markers");
  add_io(tag_cmd, common);
  add_jobs(tag_cmd, common);
  tag_cmd->add_option("--quartiles", tag.quartiles, "Quartile table (JSON)");
  tag_cmd->add_flag("--llm", tag.llm, "Classify domain/task/format with the annotator");
  tag_cmd->add_option("--categories", tag.categories,
                      "Comma-separated LLM categories");

  auto* quartiles = app.add_subcommand("quartiles", "Build a quality quartile table");
  add_io(quartiles, common);

  auto* build_cmd = app.add_subcommand("build", "Assemble training examples");
  add_io(build_cmd, common);
  add_jobs(build_cmd, common);
  auto* seed_opt = build_cmd->add_option("--seed", build_seed, "Dropout seed");
  build_cmd->add_option("--dropout", build.preset, "Dropout preset")
      ->check(CLI::IsMember({"0_50", "50_50", "70_50"}));
  build_cmd->add_option("--quartiles", build.quartiles, "Quartile table (JSON)");

  auto* stats = app.add_subcommand("stats", "Marker value distributions");
  add_io(stats, common);
  stats->add_option("--threshold", stats_threshold, "Long-tail share in percent")
      ->check(CLI::Range(0.0, 100.0));
  stats->add_option("--format", stats_format)
      ->check(CLI::IsMember({"json", "table", "both"}));

  auto* inject_cmd = app.add_subcommand("inject", "Append fixed markers to prompts");
  add_io(inject_cmd, common);
  inject_cmd->add_option("--markers", inject.markers, "Markers as a JSON object");
  auto* bucket_opt =
      inject_cmd->add_option("--quality-bucket", quality_bucket, "Quality anchor bucket")
          ->check(CLI::Range(1, 4));
  inject_cmd->add_option("--language", inject.language,
                         "Language for the anchor when records carry none");
  inject_cmd->add_option("--quartiles", inject.quartiles, "Quartile table (JSON)");

  auto* rewrite = app.add_subcommand(
      "rewrite-li", "Replace leading length instructions with markers");
  add_io(rewrite, common);

  auto* fly = app.add_subcommand("annotate-fly", "Tag prompts with the annotator");
  add_io(fly, common);
  add_jobs(fly, common);

  auto* strip = app.add_subcommand("strip", "Split generations into markers and text");
  add_io(strip, common);
  add_jobs(strip, common);
  strip->add_flag("--generate", generate,
                  "Query the generator for records without 'generation'");

  auto* eval_cmd = app.add_subcommand("eval", "Compute an evaluation metric");
  add_io(eval_cmd, common);
  add_jobs(eval_cmd, common);
  eval_cmd->add_option("--metric", eval.metric)
      ->required()
      ->check(CLI::IsMember({"violation", "lpr", "marker-acc", "winrate"}));
  eval_cmd->add_option("--format", eval.format)
      ->check(CLI::IsMember({"json", "table", "both"}));
  eval_cmd->add_option("--categories", eval.categories,
                       "Comma-separated categories for marker-acc");
  eval_cmd->add_flag("--judge", eval.judge,
                     "Judge records that have a baseline but no verdict");

  if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known |= sub->get_name() == args[0];
    if (!known) {
      err << "error: unknown subcommand '" << args[0] << "'\n\n" << app.help();
      return kExitFatal;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitFatal;
  }

  Context ctx{out, err, env, {}, {}, false};
  try {
    ctx.config = load_config(common.config_path);
    if (taxonomy->parsed()) return cmd_taxonomy(ctx, taxonomy_format);
    if (tag_cmd->parsed()) return cmd_tag(ctx, common, tag);
    if (quartiles->parsed()) return cmd_quartiles(ctx, common);
    if (build_cmd->parsed()) {
      if (seed_opt->count() > 0) build.seed = build_seed;
      return cmd_build(ctx, common, build);
    }
    if (stats->parsed()) return cmd_stats(ctx, common, stats_threshold, stats_format);
    if (inject_cmd->parsed()) {
      if (bucket_opt->count() > 0) inject.quality_bucket = quality_bucket;
      return cmd_inject(ctx, common, inject);
    }
    if (rewrite->parsed()) return cmd_rewrite(ctx, common);
    if (fly->parsed()) return cmd_annotate_fly(ctx, common);
    if (strip->parsed()) return cmd_strip(ctx, common, generate);
    if (eval_cmd->parsed()) return cmd_eval(ctx, common, eval);
  } catch (const Fatal& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  err << app.help();
  return kExitFatal;
}

}  // namespace markerkit::cli

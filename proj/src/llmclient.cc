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

#include "markerkit/llmclient.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "markerkit/parallel.h"

namespace markerkit {

using json = nlohmann::json;

struct LlmClient::JitterState {
  std::mutex mu;
  std::mt19937_64 rng;
};

std::optional<std::string> EndpointConfig::validate() const {
  if (base_url.empty()) return "base_url is empty";
  if (model_name.empty()) return "model_name is empty";
  if (!(timeout_seconds > 0)) return "timeout must be > 0";
  if (max_retries < 0) return "max_retries must be >= 0";
  if (max_in_flight < 1) return "max_in_flight must be >= 1";
  if (!std::isfinite(temperature) || temperature < 0) {
    return "temperature must be a finite value >= 0";
  }
  if (initial_backoff_seconds < 0 || backoff_multiplier < 1 ||
      max_backoff_seconds < initial_backoff_seconds) {
    return "invalid backoff settings";
  }
  return std::nullopt;
}

std::string_view to_string(ClientErrorCode code) {
  switch (code) {
    case ClientErrorCode::kConfigError:
      return "config_error";
    case ClientErrorCode::kAuthFailure:
      return "auth_failure";
    case ClientErrorCode::kHttpError:
      return "http_error";
    case ClientErrorCode::kExhaustedRetries:
      return "exhausted_retries";
    case ClientErrorCode::kMalformedResponse:
      return "malformed_response";
  }
  return "unknown";
}

std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg,
                                        int attempt) {
  double seconds = cfg.initial_backoff_seconds *
                   std::pow(cfg.backoff_multiplier, std::max(attempt, 0));
  seconds = std::min(seconds, cfg.max_backoff_seconds);
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(std::llround(seconds * 1000.0)));
}

LlmClient::LlmClient(EndpointConfig config,
                     std::shared_ptr<Transport> transport)
    : LlmClient(std::move(config), std::move(transport), Options{}) {}

LlmClient::LlmClient(EndpointConfig config,
                     std::shared_ptr<Transport> transport, Options options)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      options_(std::move(options)),
      jitter_(std::make_shared<JitterState>()) {
  if (!options_.sleeper) {
    options_.sleeper = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  if (!options_.key_resolver) {
    options_.key_resolver =
        [](const std::string& name) -> std::optional<std::string> {
      const char* v = std::getenv(name.c_str());
      if (v == nullptr) return std::nullopt;
      return std::string(v);
    };
  }
  std::uint64_t seed = options_.jitter_seed;
  if (seed == 0) seed = (std::uint64_t{std::random_device{}()} << 32) ^
                        std::random_device{}();
  jitter_->rng.seed(seed);
}

void LlmClient::diag(std::string_view message) const {
  if (options_.diagnostics) options_.diagnostics(message);
}

std::chrono::milliseconds LlmClient::jittered(
    std::chrono::milliseconds delay) const {
  // Uniform in [delay/2, delay].
  std::lock_guard<std::mutex> lock(jitter_->mu);
  std::uniform_real_distribution<double> dist(0.5, 1.0);
  return std::chrono::milliseconds(static_cast<std::int64_t>(
      std::llround(static_cast<double>(delay.count()) * dist(jitter_->rng))));
}

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

Expected<CompletionResponse, ClientError> parse_body(const std::string& body,
                                                     int attempts) {
  auto fail = [&](std::string why) {
    return unexpected(ClientError{ClientErrorCode::kMalformedResponse,
                                  std::move(why), attempts, 200});
  };
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return fail("response body is not a JSON object");
  }
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    return fail("response has no choices");
  }
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") ||
      !first["message"].is_object() ||
      !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    return fail("first choice has no message content");
  }
  CompletionResponse out;
  out.text = first["message"]["content"].get<std::string>();
  if (auto fr = first.find("finish_reason"); fr != first.end() && fr->is_string()) {
    out.finish_reason = fr->get<std::string>();
  }
  if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
    out.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
    out.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    out.total_tokens = usage->value("total_tokens", std::int64_t{0});
  }
  out.retries = attempts - 1;
  return out;
}

std::string endpoint_url(const std::string& base) {
  std::string url = base;
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url + "/chat/completions";
}

}  // namespace

Expected<CompletionResponse, ClientError> LlmClient::complete(
    const CompletionRequest& request) const {
  if (auto problem = config_.validate()) {
    return unexpected(ClientError{ClientErrorCode::kConfigError, *problem});
  }
  if (!transport_) {
    return unexpected(
        ClientError{ClientErrorCode::kConfigError, "no transport configured"});
  }

  HttpRequest http;
  http.url = endpoint_url(config_.base_url);
  http.timeout = std::chrono::milliseconds(
      static_cast<std::int64_t>(config_.timeout_seconds * 1000.0));
  http.headers.emplace_back("Content-Type", "application/json");
  if (!config_.api_key_env.empty()) {
    auto key = options_.key_resolver(config_.api_key_env);
    if (!key || key->empty()) {
      return unexpected(ClientError{
          ClientErrorCode::kAuthFailure,
          "environment variable " + config_.api_key_env + " is not set"});
    }
    http.headers.emplace_back("Authorization", "Bearer " + *key);
  }

  json body;
  body["model"] = config_.model_name;
  json messages = json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature.value_or(config_.temperature);
  http.body = body.dump();

  const int max_attempts = config_.max_retries + 1;
  int last_status = 0;
  std::string last_problem;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto result = transport_->post(http);
    if (result) {
      last_status = result->status;
      if (result->status >= 200 && result->status < 300) {
        return parse_body(result->body, attempt);
      }
      if (result->status == 401 || result->status == 403) {
        return unexpected(ClientError{
            ClientErrorCode::kAuthFailure,
            "endpoint rejected credentials (HTTP " +
                std::to_string(result->status) + ")",
            attempt, result->status});
      }
      if (!retryable_status(result->status)) {
        return unexpected(ClientError{
            ClientErrorCode::kHttpError,
            "HTTP " + std::to_string(result->status), attempt, result->status});
      }
      last_problem = "HTTP " + std::to_string(result->status);
    } else {
      last_status = 0;
      last_problem = result.error().timed_out
                         ? "timeout: " + result.error().message
                         : "transport: " + result.error().message;
    }

    if (attempt == max_attempts) break;
    auto delay = jittered(backoff_delay(config_, attempt - 1));
    std::ostringstream msg;
    msg << config_.model_name << ": " << last_problem << "; retry " << attempt
        << "/" << config_.max_retries << " in " << delay.count() << "ms";
    diag(msg.str());
    options_.sleeper(delay);
  }
  return unexpected(ClientError{
      ClientErrorCode::kExhaustedRetries,
      "gave up after " + std::to_string(max_attempts) +
          " attempts, last failure: " + last_problem,
      max_attempts, last_status});
}

Expected<std::vector<LlmClient::BatchItem>, ClientError>
LlmClient::complete_batch(std::span<const CompletionRequest> requests) const {
  if (auto problem = config_.validate()) {
    return unexpected(ClientError{ClientErrorCode::kConfigError, *problem});
  }
  std::vector<std::optional<Expected<CompletionResponse, ClientError>>> slots(
      requests.size());
  parallel_for(requests.size(), static_cast<std::size_t>(config_.max_in_flight),
               [&](std::size_t i) { slots[i].emplace(complete(requests[i])); });
  std::vector<BatchItem> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    out.emplace_back(i, std::move(*slots[i]));
  }
  return out;
}

}  // namespace markerkit

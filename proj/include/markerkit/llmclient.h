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

// A small client for chat-completion style HTTP endpoints.
//
// Requests are POSTed to `<base_url>/chat/completions` with the usual
// `{"model", "messages", "temperature"}` body, and the first choice's message
// content is returned untouched. 429, 5xx and transport failures are retried
// with exponential backoff; 401/403 fail immediately.
//
// The HTTP layer sits behind `Transport` so tests can script responses.

#ifndef MARKERKIT_LLMCLIENT_H_
#define MARKERKIT_LLMCLIENT_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "markerkit/expected.h"

namespace markerkit {

inline constexpr std::string_view kDefaultApiKeyEnv = "MARKER_LLM_API_KEY";

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  /// Environment variable holding the bearer token. Empty means the endpoint
  /// takes no credentials.
  std::string api_key_env = std::string(kDefaultApiKeyEnv);
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int max_in_flight = 4;
  double temperature = 0.0;
  double initial_backoff_seconds = 1.0;
  double backoff_multiplier = 2.0;
  double max_backoff_seconds = 60.0;

  /// Empty when valid, otherwise a description of the first problem.
  std::optional<std::string> validate() const;
};

struct CompletionRequest {
  std::string system;
  std::string user;
  std::optional<double> temperature;
};

struct CompletionResponse {
  std::string text;
  std::string finish_reason;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
  int retries = 0;
};

enum class ClientErrorCode {
  kConfigError,
  kAuthFailure,
  kHttpError,
  kExhaustedRetries,
  kMalformedResponse,
};

std::string_view to_string(ClientErrorCode code);

struct ClientError {
  ClientErrorCode code;
  std::string message;
  int attempts = 0;
  int last_status = 0;  // 0 when the last attempt never got a response
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{0};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

struct TransportFailure {
  std::string message;
  bool timed_out = false;
};

/// Must be safe to call from several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Expected<HttpResponse, TransportFailure> post(
      const HttpRequest& request) = 0;
};

/// HTTP(S) transport backed by cpp-httplib.
std::shared_ptr<Transport> make_http_transport();

/// Backoff before retry number `attempt` (0 for the first retry), before
/// jitter: initial * multiplier^attempt, capped at max_backoff.
std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, int attempt);

class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  using DiagnosticSink = std::function<void(std::string_view)>;
  using KeyResolver = std::function<std::optional<std::string>(const std::string&)>;

  struct Options {
    Sleeper sleeper;             // defaults to std::this_thread::sleep_for
    DiagnosticSink diagnostics;  // defaults to discarding
    KeyResolver key_resolver;    // defaults to std::getenv
    std::uint64_t jitter_seed = 0;  // 0 draws from std::random_device
  };

  LlmClient(EndpointConfig config, std::shared_ptr<Transport> transport);
  LlmClient(EndpointConfig config, std::shared_ptr<Transport> transport,
            Options options);

  const EndpointConfig& config() const { return config_; }

  Expected<CompletionResponse, ClientError> complete(
      const CompletionRequest& request) const;

  using BatchItem = std::pair<std::size_t,
                              Expected<CompletionResponse, ClientError>>;

  /// Runs at most `max_in_flight` requests at a time. Items come back in
  /// index order. Fails as a whole only when the configuration is invalid.
  Expected<std::vector<BatchItem>, ClientError> complete_batch(
      std::span<const CompletionRequest> requests) const;

 private:
  std::chrono::milliseconds jittered(std::chrono::milliseconds delay) const;
  void diag(std::string_view message) const;

  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  Options options_;
  struct JitterState;
  std::shared_ptr<JitterState> jitter_;
};

}  // namespace markerkit

#endif  // MARKERKIT_LLMCLIENT_H_

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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "markerkit/llmclient.h"

namespace markerkit {
namespace {

// Splits "https://host:port/v1/chat/completions" into the origin and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public Transport {
 public:
  Expected<HttpResponse, TransportFailure> post(
      const HttpRequest& request) override {
    auto [origin, path] = split_url(request.url);
    // One client per call keeps the transport trivially thread-safe.
    httplib::Client client(origin);
    if (!client.is_valid()) {
      return unexpected(TransportFailure{"invalid endpoint URL", false});
    }
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
        request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
      if (name == "Content-Type") {
        content_type = value;
      } else {
        headers.emplace(name, value);
      }
    }
    auto res = client.Post(path, headers, request.body, content_type);
    if (!res) {
      auto err = res.error();
      return unexpected(TransportFailure{httplib::to_string(err),
                                         err == httplib::Error::Read ||
                                             err == httplib::Error::Write ||
                                             err == httplib::Error::ConnectionTimeout});
    }
    return HttpResponse{res->status, res->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace markerkit

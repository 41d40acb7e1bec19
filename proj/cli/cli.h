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


// The `markers` command line: every pipeline stage as a subcommand over
// JSON Lines files.

#ifndef MARKERKIT_CLI_CLI_H_
#define MARKERKIT_CLI_CLI_H_

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "markerkit/llmclient.h"

namespace markerkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitFatal = 2;

/// Process-level dependencies, replaceable in tests.
struct Environment {
  /// Transport for an endpoint section ("annotator", "judge", "generator").
  /// Defaults to the HTTP transport.
  std::function<std::shared_ptr<Transport>(std::string_view section)>
      transport_factory;
  /// Backoff sleeper handed to every client; defaults to a real sleep.
  LlmClient::Sleeper sleeper;
  /// Key lookup handed to every client; defaults to the environment.
  LlmClient::KeyResolver key_resolver;
};

/// Runs one invocation. `args` starts with the subcommand name (no program
/// name). Data goes to `out` or to --out files, diagnostics to `err`.
/// Returns 0 on success, 1 when some records failed, 2 on fatal errors.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const Environment& env = {});

}  // namespace markerkit::cli

#endif  // MARKERKIT_CLI_CLI_H_

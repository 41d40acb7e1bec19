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

// Prompt templates from assets/prompts/, embedded at build time.

#ifndef MARKERKIT_SRC_PROMPT_ASSETS_H_
#define MARKERKIT_SRC_PROMPT_ASSETS_H_

#include <string_view>

namespace markerkit::assets {

extern const std::string_view kDomainPrompt;
extern const std::string_view kTaskPrompt;
extern const std::string_view kFormatPrompt;
extern const std::string_view kOnTheFlyPrompt;
extern const std::string_view kJudgePrompt;

}  // namespace markerkit::assets

#endif  // MARKERKIT_SRC_PROMPT_ASSETS_H_

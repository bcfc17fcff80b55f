// Copyright 2026 The mts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <string_view>

namespace mts {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

std::string_view to_string(LogLevel level);

using LogSink = std::function<void(LogLevel, std::string_view component, std::string_view message)>;

/// Replaces the process-wide sink. Passing an empty function restores the
/// default, which writes `level<TAB>component<TAB>message` lines to stderr.
void set_log_sink(LogSink sink);
void set_log_level(LogLevel min_level);

void log(LogLevel level, std::string_view component, std::string_view message);
inline void log_warn(std::string_view component, std::string_view message) {
  log(LogLevel::warn, component, message);
}
inline void log_info(std::string_view component, std::string_view message) {
  log(LogLevel::info, component, message);
}

}  // namespace mts

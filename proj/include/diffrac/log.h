// Copyright 2026 The diffrac-bcfw Authors.
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

#ifndef DIFFRAC_LOG_H_
#define DIFFRAC_LOG_H_

#include <string_view>

namespace diffrac {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

// Messages below the threshold are discarded. Default: kWarning.
void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

void Log(LogLevel level, std::string_view message);

inline void LogWarning(std::string_view message) {
  Log(LogLevel::kWarning, message);
}
inline void LogInfo(std::string_view message) { Log(LogLevel::kInfo, message); }

}  // namespace diffrac

#endif  // DIFFRAC_LOG_H_

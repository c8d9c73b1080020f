// Copyright 2026 The kpm Authors.
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

#ifndef KPM_CLI_H_
#define KPM_CLI_H_

#include <iosfwd>

namespace kpm {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit status: 0 success, 1 validation failure (including bad flags),
// 2 I/O failure.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);
int RunCli(int argc, const char* const* argv);

}  // namespace kpm

#endif  // KPM_CLI_H_

// Copyright 2026 The memre Authors.
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

#ifndef MEMRE_CLI_HPP_
#define MEMRE_CLI_HPP_

// Command-line entry point. Exit codes: 0 ok, 2 usage or configuration
// error, 3 numeric failure during training, 1 anything else.

#include <iosfwd>
#include <string>
#include <vector>

namespace memre {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

// Build identifier recorded in manifests.
const char* build_describe();

}  // namespace memre

#endif  // MEMRE_CLI_HPP_

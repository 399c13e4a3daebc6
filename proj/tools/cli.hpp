// Copyright 2026 The DRE Authors.
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

#ifndef DRE_TOOLS_CLI_HPP_
#define DRE_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace dre::cli {

// Runs one command line (args[0] is the program name). Results go to `out`,
// logs to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Levenshtein distance, used for unknown-label suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace dre::cli

#endif  // DRE_TOOLS_CLI_HPP_

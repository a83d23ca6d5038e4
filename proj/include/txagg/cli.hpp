// Copyright 2026 The txagg Authors
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

#include <iosfwd>
#include <string>
#include <vector>

namespace txagg::cli {

// Exit codes: 0 success, 1 verification failure, 2 infeasible / aborted /
// pruned or state-exploded without fallback, 3 invalid input.
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailure = 1;
inline constexpr int kInfeasible = 2;
inline constexpr int kInvalidInput = 3;

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Convenience overload writing to std::cout / std::cerr.
int run(const std::vector<std::string>& args);

}  // namespace txagg::cli

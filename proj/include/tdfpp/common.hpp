// Copyright 2026 the tdfpp authors
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

#ifndef TDFPP_COMMON_HPP
#define TDFPP_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tdfpp {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid user input: malformed specs, dimension mismatches, integer
/// overflow in coordinates, regions too large to search. Maps to exit
/// code 2 at the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The exhaustive path-enumeration oracle exceeded its node budget.
class OracleInfeasibleError : public std::runtime_error {
 public:
  explicit OracleInfeasibleError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace tdfpp

#endif  // TDFPP_COMMON_HPP

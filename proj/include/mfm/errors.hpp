// Copyright 2026 The mfmkit Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mfm {

// Precondition or schema violation. The CLI maps this to exit code 2.
class validation_error : public std::invalid_argument {
public:
  explicit validation_error(const std::string &msg)
      : std::invalid_argument(msg) {}
};

// Numerical failure such as a singular kernel. CLI exit code 3.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string &msg)
      : std::runtime_error(msg) {}
};

// File system or parse failure. CLI exit code 4.
class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace mfm

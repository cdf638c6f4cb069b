// -*-c++-*---------------------------------------------------------------------------------------
// Copyright 2026 The adaptive_sci Authors
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

#ifndef ADAPTIVE_SCI_ERRORS_HPP
#define ADAPTIVE_SCI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adaptive_sci
{
/// Bad parameters, inconsistent shapes, or values outside their domain.
class ValidationError : public std::invalid_argument
{
public:
  explicit ValidationError(const std::string & what) : std::invalid_argument(what) {}
};

/// File missing, unreadable, malformed, or not writable.
class IoError : public std::runtime_error
{
public:
  explicit IoError(const std::string & what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string & message)
{
  if (!condition) {
    throw ValidationError(message);
  }
}

}  // namespace adaptive_sci

#endif  // ADAPTIVE_SCI_ERRORS_HPP

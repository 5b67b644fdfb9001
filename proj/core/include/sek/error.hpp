// Copyright 2026 The SEK Authors
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

#ifndef SEK_ERROR_HPP
#define SEK_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sek {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing benchmark / corpus / index input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numeric precondition of the ranking math does not hold.
class ScoringError : public Error {
 public:
  using Error::Error;
};

/// The model's keyword response contained no `[keyword]: explanation` entry.
class ParseFailure : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (prompt config, pipeline config, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sek

#endif  // SEK_ERROR_HPP

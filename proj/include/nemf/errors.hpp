// Copyright 2026 The NEMF Authors
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

#include <stdexcept>
#include <string>

namespace nemf {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; the message names the file and line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant (rating out of scale,
// duplicate user/item pair, unknown genre, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unknown id or index out of range.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite factor.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace nemf

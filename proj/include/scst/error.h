// Copyright 2026 The SCST Lab Authors.
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

#ifndef SCST_ERROR_H_
#define SCST_ERROR_H_

#include <stdexcept>
#include <string>

namespace scst {

// Error categories. Each maps onto one C API status code.
enum class ErrorKind {
  kDimension,  // shape mismatch
  kInput,      // bad token id or malformed data
  kUsage,      // caller violated an operation precondition
  kConfig,     // invalid model/train configuration
  kNumeric,    // NaN/Inf produced or consumed
  kIo,         // file system or format failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& w) : Error(ErrorKind::kDimension, w) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& w) : Error(ErrorKind::kInput, w) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& w) : Error(ErrorKind::kUsage, w) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error(ErrorKind::kConfig, w) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& w) : Error(ErrorKind::kNumeric, w) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& w) : Error(ErrorKind::kIo, w) {}
};

}  // namespace scst

#endif  // SCST_ERROR_H_

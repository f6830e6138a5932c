// Copyright 2026 The softev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softev {

// Base class of every error raised by the library. The C API maps each
// subclass onto a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Soft evidence puts positive mass on an event the prior says is impossible.
class DegenerateEvidenceError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid input data. `row()` is the 1-based data row (0 when not tied to a row).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t row = 0)
      : Error(row ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite training loss. `epoch()` is 0-based.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& reason, std::size_t epoch)
      : Error(reason + " (epoch " + std::to_string(epoch) + ")"), reason_(reason), epoch_(epoch) {}
  const std::string& reason() const noexcept { return reason_; }
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::string reason_;
  std::size_t epoch_;
};

}  // namespace softev

// Copyright 2026 The Tripsynth Authors
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

#ifndef TRIPSYNTH_ERROR_HPP_
#define TRIPSYNTH_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tripsynth {

// Root of the library's error hierarchy. Everything thrown on a contract
// violation derives from this, so callers can catch one type at the CLI
// boundary and map it to an exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension or shape disagreement between tensors; the message always names
// both shapes involved.
struct ShapeError : Error {
  using Error::Error;
};

// A parameter value outside its documented domain (negative stddev, fraction
// outside (0,1), zero-width layer, ...).
struct ValueError : Error {
  using Error::Error;
};

// A record or variable that violates the survey schema (unknown label,
// value outside a declared range, duplicate variable name).
struct SchemaError : Error {
  using Error::Error;
};

// A sequence or container exceeding a hard capacity (trip count vs. padded
// length, joint distribution cell cap).
struct CapacityError : Error {
  using Error::Error;
};

// Misuse of the autodiff tape: backward through a consumed tape, or a loss
// node that is not scalar.
struct TapeError : Error {
  using Error::Error;
};

// Filesystem level failure (open/read/write).
struct IoError : Error {
  using Error::Error;
};

// A file that exists but cannot be trusted: bad magic, checksum mismatch,
// or truncation. Carries the byte offset where validation failed.
struct IntegrityError : IoError {
  IntegrityError(const std::string& what, std::uint64_t offset)
      : IoError(what + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_ = 0;
};

// A container whose format version is newer than this build understands.
struct FormatVersionError : IoError {
  using IoError::IoError;
};

// Non-finite loss during training. Carries the step at which it was detected.
struct TrainingError : Error {
  TrainingError(const std::string& what, std::uint64_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_ = 0;
};

}  // namespace tripsynth

#endif  // TRIPSYNTH_ERROR_HPP_

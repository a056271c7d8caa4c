// Copyright 2026 The qrel Authors
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

#ifndef QREL_ERROR_H
#define QREL_ERROR_H

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrel {

enum class ErrorKind {
  IndexOutOfRange,
  UncoupledCNOT,
  UnsupportedQubitCount,
  InvalidGate,
  ContainsMeasurement,
  NonPositiveFactor,
  InvalidProfile,
  ZeroShots,
  InvalidProbability,
  EmptyCouplingMap,
  InvalidSpec,
  ProfileMismatch,
  EmptyTrainingSet,
  InvalidConfig,
  ShapeMismatch,
  NormalizerMissing,
  EmptyBatch,
  NonFiniteActivation,
  EmptySplit,
  InvalidStep,
  EmptyInput,
  ZeroVariance,
  ParseError,
  IoError,
};

std::string_view error_kind_name(ErrorKind kind);

/// Error raised by every qrel operation. `kind()` identifies the failure
/// class so callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qrel

#endif  // QREL_ERROR_H

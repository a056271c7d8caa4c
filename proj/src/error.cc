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

#include "qrel/error.h"

namespace qrel {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::UncoupledCNOT: return "UncoupledCNOT";
    case ErrorKind::UnsupportedQubitCount: return "UnsupportedQubitCount";
    case ErrorKind::InvalidGate: return "InvalidGate";
    case ErrorKind::ContainsMeasurement: return "ContainsMeasurement";
    case ErrorKind::NonPositiveFactor: return "NonPositiveFactor";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::ZeroShots: return "ZeroShots";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::EmptyCouplingMap: return "EmptyCouplingMap";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ProfileMismatch: return "ProfileMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NormalizerMissing: return "NormalizerMissing";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::InvalidStep: return "InvalidStep";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace qrel

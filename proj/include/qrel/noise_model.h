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

#ifndef QREL_NOISE_MODEL_H
#define QREL_NOISE_MODEL_H

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrel/circuit.h"

namespace qrel {

/// Canonical noise levels used to diversify datasets.
inline const std::vector<double> kDefaultNoiseFactors = {0.5, 1.0, 2.0, 4.0, 8.0};

/// Backend calibration snapshot. Times are in microseconds (T1/T2) and
/// nanoseconds (gate durations). RZ is a virtual gate: zero error, zero time.
struct NoiseProfile {
  std::string profile_id;
  double noise_scale = 1.0;

  std::vector<double> t1_us;
  std::vector<double> t2_us;
  /// Per-qubit error of SX and X (and SXDG, which shares the SX pulse).
  std::vector<double> sx_error;
  std::vector<double> x_error;
  /// n x n row-major, symmetric, zero diagonal. Entry (a, b) is the CNOT
  /// error on the coupled pair {a, b}.
  std::vector<double> cnot_error;
  /// P(read 1 | prepared 0) and P(read 0 | prepared 1).
  std::vector<double> readout_error10;
  std::vector<double> readout_error01;

  double sx_duration_ns = 35.0;
  double x_duration_ns = 35.0;
  double cnot_duration_ns = 300.0;
  double measure_duration_ns = 700.0;

  size_t n_qubits() const { return t1_us.size(); }

  /// Depolarizing probability attached to a gate; 0 for RZ, BARRIER and
  /// MEASURE.
  double gate_error(const Gate &g) const;
  double gate_duration_ns(const Gate &g) const;
  double cnot_pair_error(uint32_t a, uint32_t b) const { return cnot_error[a * n_qubits() + b]; }

  bool operator==(const NoiseProfile &) const = default;
};

/// Throws Error{InvalidProfile} on any broken invariant: ragged arrays,
/// probabilities outside [0, 1], t2 > 2 t1, non-positive times.
void validate_profile(const NoiseProfile &p);

/// A profile whose every error rate is zero and whose coherence times are
/// infinite; simulating with it is equivalent to a noiseless run.
NoiseProfile noiseless_profile(size_t n_qubits);

/// Deterministic synthetic calibration for `n_qubits` qubits.
NoiseProfile make_profile(size_t n_qubits, uint64_t seed);

/// Multiplies error probabilities by `factor` (clamped to [0, 1]) and
/// divides T1/T2 by it.
NoiseProfile scale_profile(const NoiseProfile &p, double factor);

nlohmann::json profile_to_json(const NoiseProfile &p);
NoiseProfile profile_from_json(const nlohmann::json &j);

}  // namespace qrel

#endif  // QREL_NOISE_MODEL_H

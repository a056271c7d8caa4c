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

#ifndef QREL_DATASET_H
#define QREL_DATASET_H

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrel/circuit.h"
#include "qrel/noise_model.h"

namespace qrel {

/// Shot count meaning "infinitely many": the label is the exact all-zero
/// probability instead of a binomial draw.
constexpr uint64_t kExactShots = 0;

enum class Topology { Line, Ring, Grid };
enum class Split { Train, Val, Test };

std::string split_name(Split s);
Split split_from_name(const std::string &name);

/// Coupling pairs of an n-qubit device with the given topology.
CouplingMap make_topology(Topology t, size_t n_qubits);

struct GateWeights {
  double rz = 0.30;
  double sx = 0.25;
  double x = 0.15;
  double cnot = 0.30;
};

struct GenSpec {
  size_t min_qubits = 3;
  size_t max_qubits = 6;
  size_t min_gates = 5;
  size_t max_gates = 40;
  Topology topology = Topology::Line;
  size_t n_circuits = 400;
  GateWeights weights;
  std::vector<double> noise_factors = kDefaultNoiseFactors;
  uint64_t shots = 1024;
  bool with_fidelity = false;
};

/// Throws Error{InvalidSpec} on empty ranges or bad weights.
void validate_spec(const GenSpec &spec);
nlohmann::json spec_to_json(const GenSpec &spec);
GenSpec spec_from_json(const nlohmann::json &j);

struct Sample {
  Circuit circuit;  // original circuit, never the concatenated one
  NoiseProfile profile;
  uint64_t shots = 1024;
  double pst = 0.0;
  /// All-zero probability before shot sampling.
  double pst_exact = 0.0;
  std::optional<double> fidelity;
  double noise_factor = 1.0;
  uint64_t circuit_id = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Split> split;
  GenSpec spec;
  uint64_t master_seed = 0;

  std::vector<size_t> indices(Split s) const;
};

/// Random native circuit: gate kinds drawn by weight, single-qubit gates on
/// uniform qubits, CNOTs on uniform coupling edges in a uniform direction,
/// RZ angles uniform in [0, 2 pi), then simplified.
Circuit generate_random_circuit(const GenSpec &spec, uint64_t seed);

/// PST of the circuit concatenated with its inverse under `p`, sampled with
/// `shots` (kExactShots for the exact value).
Sample label_sample(const Circuit &c, const NoiseProfile &p, uint64_t shots, uint64_t seed, bool with_fidelity);

/// Assigns 70/20/10 train/val/test tags by a seeded shuffle.
std::vector<Split> assign_splits(size_t n, uint64_t seed);

/// Every circuit labelled under every noise factor of its own synthetic base
/// profile. Per-sample seeds are derived from (master_seed, index), so the
/// result does not depend on `workers`.
Dataset build_dataset(const GenSpec &spec, uint64_t master_seed, size_t workers = 1);

/// Re-draws every label from its exact probability with a new shot count.
Dataset resample_shots(const Dataset &d, uint64_t shots, uint64_t seed);

nlohmann::json sample_to_json(const Sample &s, Split split);
Sample sample_from_json(const nlohmann::json &j, Split *split = nullptr);

void write_jsonl(const Dataset &d, const std::filesystem::path &path);
std::string to_jsonl(const Dataset &d);
Dataset read_jsonl(const std::filesystem::path &path);

struct NamedCircuit {
  std::string name;
  Circuit circuit;
};

/// Small algorithm library compiled to {RZ, SX, X, CNOT}: GHZ-3, QFT-3,
/// Grover-2, QAOA MaxCut ring-4, teleportation-3 and a 4-qubit
/// hardware-efficient ansatz.
std::vector<NamedCircuit> algorithm_circuits();

}  // namespace qrel

#endif  // QREL_DATASET_H

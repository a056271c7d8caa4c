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

#ifndef QREL_CIRCUIT_H
#define QREL_CIRCUIT_H

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace qrel {

/// Node features reserve one slot per qubit, so circuits are bounded.
constexpr size_t kMaxQubits = 10;

/// RZ, SX, X and CNOT are the hardware basis. SXDG only appears inside
/// inverse halves built for simulation; BARRIER and MEASURE are markers.
enum class GateKind : uint8_t { RZ, SX, X, CNOT, SXDG, BARRIER, MEASURE };

std::string gate_kind_name(GateKind kind);
GateKind gate_kind_from_name(const std::string &name);

struct Gate {
  GateKind kind = GateKind::X;
  /// One entry for single-qubit gates, [control, target] for CNOT, empty
  /// for BARRIER (which spans every qubit).
  std::vector<uint32_t> qubits;
  /// Rotation angle in radians; meaningful for RZ only.
  double param = 0.0;

  static Gate rz(uint32_t q, double theta) { return {GateKind::RZ, {q}, theta}; }
  static Gate sx(uint32_t q) { return {GateKind::SX, {q}, 0.0}; }
  static Gate sxdg(uint32_t q) { return {GateKind::SXDG, {q}, 0.0}; }
  static Gate x(uint32_t q) { return {GateKind::X, {q}, 0.0}; }
  static Gate cnot(uint32_t control, uint32_t target) { return {GateKind::CNOT, {control, target}, 0.0}; }
  static Gate barrier() { return {GateKind::BARRIER, {}, 0.0}; }
  static Gate measure(uint32_t q) { return {GateKind::MEASURE, {q}, 0.0}; }

  bool is_basis() const;
  bool operator==(const Gate &other) const = default;
};

using Edge = std::pair<uint32_t, uint32_t>;
/// Undirected coupling pairs, stored with first < second.
using CouplingMap = std::set<Edge>;

CouplingMap make_coupling(std::initializer_list<Edge> pairs);
CouplingMap normalize_coupling(std::span<const Edge> pairs);
bool is_coupled(const CouplingMap &coupling, uint32_t a, uint32_t b);

/// Validated, immutable gate sequence.
class Circuit {
 public:
  /// Throws Error{UnsupportedQubitCount | IndexOutOfRange | UncoupledCNOT |
  /// InvalidGate} when the inputs violate the circuit invariants.
  Circuit(size_t n_qubits, std::vector<Gate> gates, CouplingMap coupling);

  size_t n_qubits() const { return n_qubits_; }
  const std::vector<Gate> &gates() const { return gates_; }
  const CouplingMap &coupling() const { return coupling_; }
  size_t size() const { return gates_.size(); }

  bool operator==(const Circuit &other) const = default;

 private:
  size_t n_qubits_;
  std::vector<Gate> gates_;
  CouplingMap coupling_;
};

inline Circuit build_circuit(size_t n_qubits, std::vector<Gate> gates, CouplingMap coupling) {
  return Circuit(n_qubits, std::move(gates), std::move(coupling));
}

/// Reverses the gate order and replaces each gate by its inverse.
Circuit inverse_circuit(const Circuit &c);

/// c ++ [BARRIER] ++ inverse(c). The ideal output state is |0...0>.
Circuit concat_with_inverse(const Circuit &c);

/// Cancels adjacent inverse pairs and merges adjacent RZ rotations on the
/// same wire until nothing changes. Nothing moves across a BARRIER.
Circuit simplify(const Circuit &c);

enum class NodeKind : uint8_t { INPUT, GATE, MEASURE };

struct GraphNode {
  NodeKind kind;
  /// Wire for INPUT/MEASURE nodes, first acted qubit for gate nodes.
  uint32_t qubit;
  /// Index into Circuit::gates() for nodes built from a gate, else -1.
  int64_t gate_index;
};

struct GraphEdge {
  uint32_t src;
  uint32_t dst;
  uint32_t wire;
  bool operator==(const GraphEdge &) const = default;
};

/// Gate dependency DAG. Node order is also the topological index: INPUT
/// nodes by qubit, gates in circuit order, then MEASURE nodes by qubit.
struct CircuitGraph {
  size_t n_qubits = 0;
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::vector<uint32_t> topo_index;

  size_t size() const { return nodes.size(); }
  /// Undirected adjacency with self loops, sorted and deduplicated.
  std::vector<std::vector<uint32_t>> neighbor_sets() const;
};

CircuitGraph to_dag(const Circuit &c);

/// Kahn's algorithm; false if the edge set has a cycle.
bool is_acyclic(const CircuitGraph &g);

struct GateCounts {
  size_t rz = 0;
  size_t sx = 0;
  size_t x = 0;
  size_t cnot = 0;
  size_t sxdg = 0;
  size_t measure = 0;
  size_t total() const { return rz + sx + x + cnot + sxdg + measure; }
};

struct GlobalStats {
  size_t depth = 0;
  size_t width = 0;
  GateCounts counts;
};

GlobalStats circuit_stats(const Circuit &c);

nlohmann::json circuit_to_json(const Circuit &c);
Circuit circuit_from_json(const nlohmann::json &j);

}  // namespace qrel

#endif  // QREL_CIRCUIT_H

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

#include "qrel/circuit.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qrel/dataset.h"
#include "qrel/error.h"
#include "qrel/random.h"

namespace qrel {
namespace {

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected qrel::Error";
  return ErrorKind::IoError;
}

Circuit random_circuit(uint64_t seed, size_t max_qubits = 6) {
  GenSpec spec;
  spec.max_qubits = max_qubits;
  return generate_random_circuit(spec, seed);
}

TEST(circuit, BuildsMinimalCircuits) {
  const Circuit one(1, {Gate::x(0)}, {});
  EXPECT_EQ(one.n_qubits(), 1u);
  EXPECT_EQ(one.size(), 1u);
  const Circuit two(2, {Gate::cnot(0, 1)}, make_coupling({{0, 1}}));
  EXPECT_EQ(two.gates()[0], Gate::cnot(0, 1));
}

TEST(circuit, RejectsInvalidInputs) {
  EXPECT_EQ(kind_of([] { Circuit(3, {Gate::cnot(0, 2)}, make_coupling({{0, 1}, {1, 2}})); }),
            ErrorKind::UncoupledCNOT);
  EXPECT_EQ(kind_of([] { Circuit(11, {}, {}); }), ErrorKind::UnsupportedQubitCount);
  EXPECT_EQ(kind_of([] { Circuit(0, {}, {}); }), ErrorKind::UnsupportedQubitCount);
  EXPECT_EQ(kind_of([] { Circuit(2, {Gate::x(2)}, {}); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([] { Circuit(2, {Gate::cnot(1, 1)}, make_coupling({{0, 1}})); }), ErrorKind::InvalidGate);
  EXPECT_EQ(kind_of([] { Circuit(1, {Gate::rz(0, std::nan(""))}, {}); }), ErrorKind::InvalidGate);
  EXPECT_EQ(kind_of([] { Circuit(2, {Gate::cnot(0, 1)}, make_coupling({{0, 2}})); }), ErrorKind::IndexOutOfRange);
}

TEST(circuit, CouplingIsUndirected) {
  const CouplingMap m = make_coupling({{2, 1}, {1, 2}, {0, 1}});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_TRUE(is_coupled(m, 1, 2));
  EXPECT_TRUE(is_coupled(m, 2, 1));
  EXPECT_FALSE(is_coupled(m, 0, 2));
  EXPECT_NO_THROW(Circuit(3, {Gate::cnot(2, 1)}, m));
}

TEST(circuit, InverseCircuit) {
  const CouplingMap m = make_coupling({{0, 1}});
  EXPECT_EQ(inverse_circuit(Circuit(1, {Gate::rz(0, 0.3)}, {})).gates(), std::vector<Gate>{Gate::rz(0, -0.3)});
  EXPECT_EQ(inverse_circuit(Circuit(2, {Gate::cnot(0, 1), Gate::x(1)}, m)).gates(),
            (std::vector<Gate>{Gate::x(1), Gate::cnot(0, 1)}));
  EXPECT_EQ(inverse_circuit(Circuit(1, {Gate::sx(0)}, {})).gates(), std::vector<Gate>{Gate::sxdg(0)});
  EXPECT_EQ(kind_of([] { inverse_circuit(Circuit(1, {Gate::measure(0)}, {})); }), ErrorKind::ContainsMeasurement);
}

TEST(circuit, InverseIsAnInvolution) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Circuit c = random_circuit(seed);
    EXPECT_EQ(inverse_circuit(inverse_circuit(c)), c) << "seed " << seed;
  }
}

TEST(circuit, ConcatWithInverse) {
  const CouplingMap m = make_coupling({{0, 1}});
  EXPECT_EQ(concat_with_inverse(Circuit(2, {Gate::cnot(0, 1), Gate::x(1)}, m)).gates(),
            (std::vector<Gate>{Gate::cnot(0, 1), Gate::x(1), Gate::barrier(), Gate::x(1), Gate::cnot(0, 1)}));
  EXPECT_EQ(concat_with_inverse(Circuit(1, {}, {})).gates(), std::vector<Gate>{Gate::barrier()});
  const double pi = std::numbers::pi;
  EXPECT_EQ(concat_with_inverse(Circuit(1, {Gate::rz(0, pi)}, {})).gates(),
            (std::vector<Gate>{Gate::rz(0, pi), Gate::barrier(), Gate::rz(0, -pi)}));
}

TEST(circuit, SimplifyExamples) {
  const CouplingMap m = make_coupling({{0, 1}});
  EXPECT_TRUE(simplify(Circuit(1, {Gate::x(0), Gate::x(0)}, {})).gates().empty());
  const Circuit merged = simplify(Circuit(1, {Gate::rz(0, 0.2), Gate::rz(0, 0.3)}, {}));
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged.gates()[0].kind, GateKind::RZ);
  EXPECT_NEAR(merged.gates()[0].param, 0.5, 1e-15);
  const Circuit fenced(2, {Gate::cnot(0, 1), Gate::barrier(), Gate::cnot(0, 1)}, m);
  EXPECT_EQ(simplify(fenced), fenced);
  EXPECT_TRUE(simplify(Circuit(1, {Gate::sx(0), Gate::sxdg(0)}, {})).gates().empty());
  EXPECT_TRUE(simplify(Circuit(1, {Gate::rz(0, 1.0), Gate::rz(0, 2 * std::numbers::pi - 1.0)}, {})).gates().empty());
}

TEST(circuit, SimplifyCascadesAndRespectsWires) {
  const CouplingMap m = make_coupling({{0, 1}});
  // X(0) X(0) inside a CNOT pair: cancelling the X pair exposes the CNOT pair.
  EXPECT_TRUE(simplify(Circuit(2, {Gate::cnot(0, 1), Gate::x(0), Gate::x(0), Gate::cnot(0, 1)}, m)).gates().empty());
  // A gate on the target wire separates the CNOTs.
  const Circuit blocked(2, {Gate::cnot(0, 1), Gate::x(1), Gate::cnot(0, 1)}, m);
  EXPECT_EQ(simplify(blocked), blocked);
  // Opposite orientation does not cancel.
  const Circuit flipped(2, {Gate::cnot(0, 1), Gate::cnot(1, 0)}, m);
  EXPECT_EQ(simplify(flipped), flipped);
  // Gates on other wires do not block.
  EXPECT_EQ(simplify(Circuit(2, {Gate::x(0), Gate::x(1), Gate::x(0)}, m)).gates(), std::vector<Gate>{Gate::x(1)});
}

TEST(circuit, SimplifyIsIdempotent) {
  GenSpec spec;
  spec.weights = {0.2, 0.2, 0.4, 0.2};
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<Gate> gates;
    const CouplingMap m = make_topology(Topology::Line, 3);
    for (int i = 0; i < 30; ++i) {
      const auto q = static_cast<uint32_t>(uniform_index(rng, 3));
      switch (uniform_index(rng, 4)) {
        case 0: gates.push_back(Gate::x(q)); break;
        case 1: gates.push_back(Gate::sx(q)); break;
        case 2: gates.push_back(Gate::rz(q, uniform_index(rng, 2) ? 0.5 : -0.5)); break;
        default: gates.push_back(q == 2 ? Gate::cnot(2, 1) : Gate::cnot(q, q + 1)); break;
      }
    }
    const Circuit once = simplify(Circuit(3, gates, m));
    EXPECT_EQ(simplify(once), once) << "seed " << seed;
    EXPECT_LE(once.size(), gates.size());
  }
}

TEST(circuit, DagExamples) {
  const CircuitGraph g1 = to_dag(Circuit(1, {Gate::x(0)}, {}));
  ASSERT_EQ(g1.size(), 3u);
  EXPECT_EQ(g1.nodes[0].kind, NodeKind::INPUT);
  EXPECT_EQ(g1.nodes[1].kind, NodeKind::GATE);
  EXPECT_EQ(g1.nodes[2].kind, NodeKind::MEASURE);
  EXPECT_EQ(g1.edges, (std::vector<GraphEdge>{{0, 1, 0}, {1, 2, 0}}));

  const CircuitGraph g2 = to_dag(Circuit(2, {Gate::cnot(0, 1)}, make_coupling({{0, 1}})));
  ASSERT_EQ(g2.size(), 5u);
  size_t in = 0, out = 0;
  for (const auto &e : g2.edges) {
    in += e.dst == 2;
    out += e.src == 2;
  }
  EXPECT_EQ(in, 2u);
  EXPECT_EQ(out, 2u);

  EXPECT_EQ(to_dag(Circuit(2, {Gate::x(0), Gate::cnot(0, 1)}, make_coupling({{0, 1}}))).size(), 6u);
}

TEST(circuit, DagNeighborSetsIncludeSelf) {
  const CircuitGraph g = to_dag(Circuit(2, {Gate::cnot(0, 1)}, make_coupling({{0, 1}})));
  const auto nb = g.neighbor_sets();
  EXPECT_EQ(nb[2], (std::vector<uint32_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(nb[0], (std::vector<uint32_t>{0, 2}));
}

TEST(circuit, DagInvariantsOnRandomCircuits) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Circuit c = random_circuit(seed);
    const CircuitGraph g = to_dag(c);
    EXPECT_EQ(g.size(), 2 * c.n_qubits() + c.size());
    EXPECT_TRUE(is_acyclic(g));
    for (const auto &e : g.edges) EXPECT_LT(g.topo_index[e.src], g.topo_index[e.dst]);
    // Each wire is a path from its INPUT node to its MEASURE node.
    for (uint32_t q = 0; q < c.n_qubits(); ++q) {
      uint32_t at = q;
      size_t steps = 0;
      while (g.nodes[at].kind != NodeKind::MEASURE) {
        uint32_t next = UINT32_MAX;
        for (const auto &e : g.edges) {
          if (e.src == at && e.wire == q) next = e.dst;
        }
        ASSERT_NE(next, UINT32_MAX);
        at = next;
        ++steps;
      }
      EXPECT_EQ(g.nodes[at].qubit, q);
      EXPECT_GE(steps, 1u);
    }
  }
}

TEST(circuit, CycleIsDetected) {
  CircuitGraph g = to_dag(Circuit(1, {Gate::x(0)}, {}));
  g.edges.push_back({2, 0, 0});
  EXPECT_FALSE(is_acyclic(g));
}

TEST(circuit, StatsExamples) {
  const CouplingMap m = make_coupling({{0, 1}});
  const GlobalStats a = circuit_stats(Circuit(2, {Gate::x(0), Gate::x(1)}, m));
  EXPECT_EQ(a.depth, 1u);
  EXPECT_EQ(a.width, 2u);
  EXPECT_EQ(a.counts.x, 2u);
  EXPECT_EQ(a.counts.total(), 2u);
  EXPECT_EQ(circuit_stats(Circuit(2, {Gate::x(0), Gate::cnot(0, 1)}, m)).depth, 2u);
  const GlobalStats e = circuit_stats(Circuit(1, {}, {}));
  EXPECT_EQ(e.depth, 0u);
  EXPECT_EQ(e.counts.total(), 0u);
  EXPECT_EQ(circuit_stats(Circuit(2, {Gate::x(0), Gate::barrier(), Gate::x(1)}, m)).depth, 1u);
}

TEST(circuit, StatsInvariants) {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const Circuit c = random_circuit(seed);
    const GlobalStats s = circuit_stats(c);
    EXPECT_LE(s.depth, c.size());
    EXPECT_EQ(s.counts.total(), c.size());
    EXPECT_EQ(s.width, c.n_qubits());
  }
}

TEST(circuit, JsonRoundTrip) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Circuit c = random_circuit(seed);
    EXPECT_EQ(circuit_from_json(circuit_to_json(c)), c);
    EXPECT_EQ(circuit_from_json(nlohmann::json::parse(circuit_to_json(c).dump())), c);
  }
  EXPECT_EQ(kind_of([] { circuit_from_json(nlohmann::json{{"n_qubits", 1}}); }), ErrorKind::ParseError);
}

}  // namespace
}  // namespace qrel

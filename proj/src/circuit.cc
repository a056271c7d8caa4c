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

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "qrel/error.h"

namespace qrel {

std::string gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::RZ: return "RZ";
    case GateKind::SX: return "SX";
    case GateKind::X: return "X";
    case GateKind::CNOT: return "CNOT";
    case GateKind::SXDG: return "SXDG";
    case GateKind::BARRIER: return "BARRIER";
    case GateKind::MEASURE: return "MEASURE";
  }
  return "?";
}

GateKind gate_kind_from_name(const std::string &name) {
  for (GateKind k : {GateKind::RZ, GateKind::SX, GateKind::X, GateKind::CNOT, GateKind::SXDG, GateKind::BARRIER,
                     GateKind::MEASURE}) {
    if (gate_kind_name(k) == name) return k;
  }
  throw Error(ErrorKind::ParseError, "unknown gate kind '" + name + "'");
}

bool Gate::is_basis() const {
  return kind == GateKind::RZ || kind == GateKind::SX || kind == GateKind::X || kind == GateKind::CNOT;
}

CouplingMap normalize_coupling(std::span<const Edge> pairs) {
  CouplingMap out;
  for (auto [a, b] : pairs) {
    if (a == b) throw Error(ErrorKind::InvalidGate, "coupling pair joins qubit " + std::to_string(a) + " to itself");
    out.emplace(std::min(a, b), std::max(a, b));
  }
  return out;
}

CouplingMap make_coupling(std::initializer_list<Edge> pairs) {
  return normalize_coupling(std::span<const Edge>(pairs.begin(), pairs.size()));
}

bool is_coupled(const CouplingMap &coupling, uint32_t a, uint32_t b) {
  return coupling.contains({std::min(a, b), std::max(a, b)});
}

namespace {

size_t expected_arity(GateKind kind) {
  switch (kind) {
    case GateKind::CNOT: return 2;
    case GateKind::BARRIER: return 0;
    default: return 1;
  }
}

}  // namespace

Circuit::Circuit(size_t n_qubits, std::vector<Gate> gates, CouplingMap coupling)
    : n_qubits_(n_qubits), gates_(std::move(gates)), coupling_(std::move(coupling)) {
  if (n_qubits_ == 0 || n_qubits_ > kMaxQubits) {
    throw Error(ErrorKind::UnsupportedQubitCount,
                "circuit has " + std::to_string(n_qubits_) + " qubits; supported range is 1.." +
                    std::to_string(kMaxQubits));
  }
  for (const auto &[a, b] : coupling_) {
    if (a >= n_qubits_ || b >= n_qubits_) {
      throw Error(ErrorKind::IndexOutOfRange, "coupling pair (" + std::to_string(a) + "," + std::to_string(b) +
                                                  ") outside " + std::to_string(n_qubits_) + " qubits");
    }
  }
  for (size_t i = 0; i < gates_.size(); ++i) {
    const Gate &g = gates_[i];
    const std::string where = "gate " + std::to_string(i) + " (" + gate_kind_name(g.kind) + ")";
    if (g.qubits.size() != expected_arity(g.kind)) {
      throw Error(ErrorKind::InvalidGate, where + " has " + std::to_string(g.qubits.size()) + " qubit operands");
    }
    for (uint32_t q : g.qubits) {
      if (q >= n_qubits_) {
        throw Error(ErrorKind::IndexOutOfRange, where + " acts on qubit " + std::to_string(q));
      }
    }
    if (g.kind == GateKind::CNOT) {
      if (g.qubits[0] == g.qubits[1]) throw Error(ErrorKind::InvalidGate, where + " has control == target");
      if (!is_coupled(coupling_, g.qubits[0], g.qubits[1])) {
        throw Error(ErrorKind::UncoupledCNOT, where + " on (" + std::to_string(g.qubits[0]) + "," +
                                                  std::to_string(g.qubits[1]) + ") which is not in the coupling map");
      }
    }
    if (g.kind == GateKind::RZ && !std::isfinite(g.param)) {
      throw Error(ErrorKind::InvalidGate, where + " has a non-finite angle");
    }
  }
}

namespace {

Gate inverse_gate(const Gate &g) {
  switch (g.kind) {
    case GateKind::RZ: return Gate::rz(g.qubits[0], -g.param);
    case GateKind::SX: return Gate::sxdg(g.qubits[0]);
    case GateKind::SXDG: return Gate::sx(g.qubits[0]);
    case GateKind::MEASURE: throw Error(ErrorKind::ContainsMeasurement, "cannot invert a measurement");
    default: return g;  // X, CNOT and BARRIER are self-inverse.
  }
}

}  // namespace

Circuit inverse_circuit(const Circuit &c) {
  std::vector<Gate> out;
  out.reserve(c.size());
  for (auto it = c.gates().rbegin(); it != c.gates().rend(); ++it) out.push_back(inverse_gate(*it));
  return Circuit(c.n_qubits(), std::move(out), c.coupling());
}

Circuit concat_with_inverse(const Circuit &c) {
  Circuit inv = inverse_circuit(c);
  std::vector<Gate> out;
  out.reserve(2 * c.size() + 1);
  out.insert(out.end(), c.gates().begin(), c.gates().end());
  out.push_back(Gate::barrier());
  out.insert(out.end(), inv.gates().begin(), inv.gates().end());
  return Circuit(c.n_qubits(), std::move(out), c.coupling());
}

namespace {

bool is_zero_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r < 1e-12 || kTwoPi - r < 1e-12;
}

bool cancels(const Gate &a, const Gate &b) {
  if (a.qubits != b.qubits) return false;
  switch (a.kind) {
    case GateKind::X: return b.kind == GateKind::X;
    case GateKind::CNOT: return b.kind == GateKind::CNOT;
    case GateKind::SX: return b.kind == GateKind::SXDG;
    case GateKind::SXDG: return b.kind == GateKind::SX;
    default: return false;
  }
}

// One left-to-right sweep. Each wire keeps a stack of the surviving gates
// placed on it; a new gate can only interact with a predecessor that sits on
// top of every one of its wires.
std::vector<Gate> simplify_pass(const std::vector<Gate> &gates, size_t n_qubits, bool &changed) {
  std::vector<Gate> out;
  std::vector<bool> alive;
  std::vector<std::vector<size_t>> wire(n_qubits);

  auto push = [&](Gate g) {
    const size_t idx = out.size();
    if (g.kind == GateKind::BARRIER) {
      for (auto &w : wire) w.push_back(idx);
    } else {
      for (uint32_t q : g.qubits) wire[q].push_back(idx);
    }
    out.push_back(std::move(g));
    alive.push_back(true);
  };
  auto pop = [&](size_t idx) {
    for (uint32_t q : out[idx].qubits) wire[q].pop_back();
    alive[idx] = false;
  };

  for (const Gate &g : gates) {
    if (g.kind == GateKind::BARRIER || g.kind == GateKind::MEASURE) {
      push(g);
      continue;
    }
    if (g.kind == GateKind::RZ && is_zero_angle(g.param)) {
      changed = true;
      continue;
    }
    bool shared_top = true;
    size_t prev = 0;
    for (size_t k = 0; k < g.qubits.size(); ++k) {
      const auto &w = wire[g.qubits[k]];
      if (w.empty() || (k > 0 && w.back() != prev)) {
        shared_top = false;
        break;
      }
      prev = w.back();
    }
    if (shared_top) {
      Gate &p = out[prev];
      if (cancels(p, g)) {
        pop(prev);
        changed = true;
        continue;
      }
      if (p.kind == GateKind::RZ && g.kind == GateKind::RZ && p.qubits == g.qubits) {
        p.param += g.param;
        if (is_zero_angle(p.param)) pop(prev);
        changed = true;
        continue;
      }
    }
    push(g);
  }

  std::vector<Gate> result;
  result.reserve(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    if (alive[i]) result.push_back(std::move(out[i]));
  }
  return result;
}

}  // namespace

Circuit simplify(const Circuit &c) {
  std::vector<Gate> gates = c.gates();
  bool changed = true;
  while (changed) {
    changed = false;
    gates = simplify_pass(gates, c.n_qubits(), changed);
  }
  return Circuit(c.n_qubits(), std::move(gates), c.coupling());
}

CircuitGraph to_dag(const Circuit &c) {
  CircuitGraph g;
  const auto n = static_cast<uint32_t>(c.n_qubits());
  g.n_qubits = n;
  std::vector<uint32_t> last(n);
  for (uint32_t q = 0; q < n; ++q) {
    last[q] = static_cast<uint32_t>(g.nodes.size());
    g.nodes.push_back({NodeKind::INPUT, q, -1});
  }
  for (size_t i = 0; i < c.size(); ++i) {
    const Gate &gate = c.gates()[i];
    if (gate.kind == GateKind::BARRIER) continue;
    const auto id = static_cast<uint32_t>(g.nodes.size());
    const NodeKind kind = gate.kind == GateKind::MEASURE ? NodeKind::MEASURE : NodeKind::GATE;
    g.nodes.push_back({kind, gate.qubits[0], static_cast<int64_t>(i)});
    for (uint32_t q : gate.qubits) {
      g.edges.push_back({last[q], id, q});
      last[q] = id;
    }
  }
  for (uint32_t q = 0; q < n; ++q) {
    const auto id = static_cast<uint32_t>(g.nodes.size());
    g.nodes.push_back({NodeKind::MEASURE, q, -1});
    g.edges.push_back({last[q], id, q});
  }
  g.topo_index.resize(g.nodes.size());
  for (uint32_t i = 0; i < g.topo_index.size(); ++i) g.topo_index[i] = i;
  return g;
}

std::vector<std::vector<uint32_t>> CircuitGraph::neighbor_sets() const {
  std::vector<std::vector<uint32_t>> nb(nodes.size());
  for (uint32_t i = 0; i < nodes.size(); ++i) nb[i].push_back(i);
  for (const auto &e : edges) {
    nb[e.src].push_back(e.dst);
    nb[e.dst].push_back(e.src);
  }
  for (auto &s : nb) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return nb;
}

bool is_acyclic(const CircuitGraph &g) {
  std::vector<size_t> indegree(g.size(), 0);
  std::vector<std::vector<uint32_t>> out(g.size());
  for (const auto &e : g.edges) {
    ++indegree[e.dst];
    out[e.src].push_back(e.dst);
  }
  std::deque<uint32_t> ready;
  for (uint32_t i = 0; i < g.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  size_t visited = 0;
  while (!ready.empty()) {
    const uint32_t v = ready.front();
    ready.pop_front();
    ++visited;
    for (uint32_t w : out[v]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  return visited == g.size();
}

GlobalStats circuit_stats(const Circuit &c) {
  GlobalStats s;
  s.width = c.n_qubits();
  std::vector<size_t> level(c.n_qubits(), 0);
  for (const Gate &g : c.gates()) {
    switch (g.kind) {
      case GateKind::BARRIER: continue;
      case GateKind::RZ: ++s.counts.rz; break;
      case GateKind::SX: ++s.counts.sx; break;
      case GateKind::X: ++s.counts.x; break;
      case GateKind::CNOT: ++s.counts.cnot; break;
      case GateKind::SXDG: ++s.counts.sxdg; break;
      case GateKind::MEASURE: ++s.counts.measure; break;
    }
    size_t layer = 0;
    for (uint32_t q : g.qubits) layer = std::max(layer, level[q]);
    ++layer;
    for (uint32_t q : g.qubits) level[q] = layer;
    s.depth = std::max(s.depth, layer);
  }
  return s;
}

nlohmann::json circuit_to_json(const Circuit &c) {
  nlohmann::json j;
  j["n_qubits"] = c.n_qubits();
  auto coupling = nlohmann::json::array();
  for (const auto &[a, b] : c.coupling()) coupling.push_back({a, b});
  j["coupling"] = std::move(coupling);
  auto gates = nlohmann::json::array();
  for (const Gate &g : c.gates()) {
    nlohmann::json jg;
    jg["kind"] = gate_kind_name(g.kind);
    jg["qubits"] = g.qubits;
    if (g.kind == GateKind::RZ) jg["param"] = g.param;
    gates.push_back(std::move(jg));
  }
  j["gates"] = std::move(gates);
  return j;
}

Circuit circuit_from_json(const nlohmann::json &j) {
  try {
    const size_t n = j.at("n_qubits").get<size_t>();
    std::vector<Edge> pairs;
    for (const auto &p : j.value("coupling", nlohmann::json::array())) {
      if (p.size() != 2) throw Error(ErrorKind::ParseError, "coupling entries must be [a, b] pairs");
      pairs.emplace_back(p[0].get<uint32_t>(), p[1].get<uint32_t>());
    }
    std::vector<Gate> gates;
    for (const auto &jg : j.at("gates")) {
      Gate g;
      g.kind = gate_kind_from_name(jg.at("kind").get<std::string>());
      g.qubits = jg.value("qubits", std::vector<uint32_t>{});
      if (g.kind == GateKind::RZ) g.param = jg.at("param").get<double>();
      gates.push_back(std::move(g));
    }
    return Circuit(n, std::move(gates), normalize_coupling(pairs));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("circuit JSON: ") + e.what());
  }
}

}  // namespace qrel

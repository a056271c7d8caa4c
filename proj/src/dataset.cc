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

#include "qrel/dataset.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qrel/error.h"
#include "qrel/parallel.h"
#include "qrel/random.h"
#include "qrel/simulator.h"

namespace qrel {

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string &name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw Error(ErrorKind::ParseError, "unknown split '" + name + "'");
}

namespace {

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::Line: return "line";
    case Topology::Ring: return "ring";
    case Topology::Grid: return "grid";
  }
  return "?";
}

Topology topology_from_name(const std::string &name) {
  if (name == "line") return Topology::Line;
  if (name == "ring") return Topology::Ring;
  if (name == "grid") return Topology::Grid;
  throw Error(ErrorKind::InvalidSpec, "unknown topology '" + name + "'");
}

}  // namespace

CouplingMap make_topology(Topology t, size_t n_qubits) {
  std::vector<Edge> pairs;
  const auto n = static_cast<uint32_t>(n_qubits);
  switch (t) {
    case Topology::Line:
      for (uint32_t q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
      break;
    case Topology::Ring:
      for (uint32_t q = 0; q + 1 < n; ++q) pairs.emplace_back(q, q + 1);
      if (n > 2) pairs.emplace_back(0, n - 1);
      break;
    case Topology::Grid: {
      const auto cols = static_cast<uint32_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      for (uint32_t q = 0; q < n; ++q) {
        if ((q + 1) % cols != 0 && q + 1 < n) pairs.emplace_back(q, q + 1);
        if (q + cols < n) pairs.emplace_back(q, q + cols);
      }
      break;
    }
  }
  return normalize_coupling(pairs);
}

void validate_spec(const GenSpec &spec) {
  auto fail = [](const std::string &what) { throw Error(ErrorKind::InvalidSpec, what); };
  if (spec.min_qubits < 1 || spec.min_qubits > spec.max_qubits || spec.max_qubits > kMaxQubits) {
    fail("qubit range must satisfy 1 <= min <= max <= " + std::to_string(kMaxQubits));
  }
  if (spec.min_gates < 1 || spec.min_gates > spec.max_gates) fail("gate range must satisfy 1 <= min <= max");
  if (spec.n_circuits < 1) fail("n_circuits must be positive");
  const GateWeights &w = spec.weights;
  if (w.rz < 0 || w.sx < 0 || w.x < 0 || w.cnot < 0 || w.rz + w.sx + w.x + w.cnot <= 0) {
    fail("gate weights must be non-negative with a positive sum");
  }
  if (spec.noise_factors.empty()) fail("at least one noise factor is required");
  for (double f : spec.noise_factors) {
    if (!(f > 0)) fail("noise factors must be positive");
  }
}

nlohmann::json spec_to_json(const GenSpec &spec) {
  return {{"min_qubits", spec.min_qubits},
          {"max_qubits", spec.max_qubits},
          {"min_gates", spec.min_gates},
          {"max_gates", spec.max_gates},
          {"topology", topology_name(spec.topology)},
          {"n_circuits", spec.n_circuits},
          {"weights", {{"RZ", spec.weights.rz}, {"SX", spec.weights.sx}, {"X", spec.weights.x}, {"CNOT", spec.weights.cnot}}},
          {"noise_factors", spec.noise_factors},
          {"shots", spec.shots},
          {"with_fidelity", spec.with_fidelity}};
}

GenSpec spec_from_json(const nlohmann::json &j) {
  GenSpec s;
  try {
    s.min_qubits = j.value("min_qubits", s.min_qubits);
    s.max_qubits = j.value("max_qubits", s.max_qubits);
    s.min_gates = j.value("min_gates", s.min_gates);
    s.max_gates = j.value("max_gates", s.max_gates);
    if (j.contains("topology")) s.topology = topology_from_name(j["topology"].get<std::string>());
    s.n_circuits = j.value("n_circuits", s.n_circuits);
    if (j.contains("weights")) {
      const auto &w = j["weights"];
      s.weights.rz = w.value("RZ", 0.0);
      s.weights.sx = w.value("SX", 0.0);
      s.weights.x = w.value("X", 0.0);
      s.weights.cnot = w.value("CNOT", 0.0);
    }
    s.noise_factors = j.value("noise_factors", s.noise_factors);
    s.shots = j.value("shots", s.shots);
    s.with_fidelity = j.value("with_fidelity", s.with_fidelity);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("generation spec JSON: ") + e.what());
  }
  validate_spec(s);
  return s;
}

std::vector<size_t> Dataset::indices(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < split.size(); ++i) {
    if (split[i] == s) out.push_back(i);
  }
  return out;
}

Circuit generate_random_circuit(const GenSpec &spec, uint64_t seed) {
  validate_spec(spec);
  Rng rng(mix_seed(seed));
  const size_t n = spec.min_qubits + uniform_index(rng, spec.max_qubits - spec.min_qubits + 1);
  const size_t n_gates = spec.min_gates + uniform_index(rng, spec.max_gates - spec.min_gates + 1);
  CouplingMap coupling = make_topology(spec.topology, n);
  const std::vector<Edge> edges(coupling.begin(), coupling.end());
  if (spec.weights.cnot > 0 && edges.empty()) {
    throw Error(ErrorKind::EmptyCouplingMap, "CNOTs requested on a " + std::to_string(n) + "-qubit device without couplings");
  }

  const GateWeights &w = spec.weights;
  const double total = w.rz + w.sx + w.x + w.cnot;
  std::vector<Gate> gates;
  gates.reserve(n_gates);
  for (size_t i = 0; i < n_gates; ++i) {
    const double u = uniform01(rng) * total;
    if (u < w.rz) {
      const auto q = static_cast<uint32_t>(uniform_index(rng, n));
      gates.push_back(Gate::rz(q, uniform(rng, 0.0, 2.0 * std::numbers::pi)));
    } else if (u < w.rz + w.sx) {
      gates.push_back(Gate::sx(static_cast<uint32_t>(uniform_index(rng, n))));
    } else if (u < w.rz + w.sx + w.x) {
      gates.push_back(Gate::x(static_cast<uint32_t>(uniform_index(rng, n))));
    } else {
      const Edge e = edges[uniform_index(rng, edges.size())];
      if (uniform_index(rng, 2) == 0) {
        gates.push_back(Gate::cnot(e.first, e.second));
      } else {
        gates.push_back(Gate::cnot(e.second, e.first));
      }
    }
  }
  return simplify(Circuit(n, std::move(gates), std::move(coupling)));
}

Sample label_sample(const Circuit &c, const NoiseProfile &p, uint64_t shots, uint64_t seed, bool with_fidelity) {
  for (const Gate &g : c.gates()) {
    if (!g.is_basis()) {
      throw Error(ErrorKind::InvalidGate, "dataset circuits may only contain RZ, SX, X and CNOT, found " +
                                              gate_kind_name(g.kind));
    }
  }
  const DensityMatrix rho = simulate_density(concat_with_inverse(c), p, true);
  const double p0 = all_zero_probability(rho, p, true);
  Sample s{c, p, shots, p0, p0, std::nullopt, p.noise_scale, 0};
  if (shots != kExactShots) s.pst = sample_pst(p0, shots, seed);
  if (with_fidelity) s.fidelity = state_fidelity(c, p);
  return s;
}

std::vector<Split> assign_splits(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed));
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto n_train = static_cast<size_t>(std::llround(0.7 * static_cast<double>(n)));
  const auto n_val = std::min(n - n_train, static_cast<size_t>(std::llround(0.2 * static_cast<double>(n))));
  std::vector<Split> out(n, Split::Test);
  for (size_t k = 0; k < n; ++k) {
    out[order[k]] = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
  }
  return out;
}

namespace {

// Seed streams derived from the master seed.
constexpr uint64_t kCircuitStream = 1;
constexpr uint64_t kProfileStream = 2;
constexpr uint64_t kShotStream = 3;
constexpr uint64_t kSplitStream = 4;

}  // namespace

Dataset build_dataset(const GenSpec &spec, uint64_t master_seed, size_t workers) {
  validate_spec(spec);
  const size_t n_factors = spec.noise_factors.size();
  const size_t n_samples = spec.n_circuits * n_factors;

  std::vector<std::optional<Circuit>> circuits(spec.n_circuits);
  std::vector<std::optional<NoiseProfile>> bases(spec.n_circuits);
  parallel_for(spec.n_circuits, workers, [&](size_t i) {
    circuits[i] = generate_random_circuit(spec, derive_seed(derive_seed(master_seed, kCircuitStream), i));
    bases[i] = make_profile(circuits[i]->n_qubits(), derive_seed(derive_seed(master_seed, kProfileStream), i));
  });

  std::vector<std::optional<Sample>> labelled(n_samples);
  parallel_for(n_samples, workers, [&](size_t k) {
    const size_t i = k / n_factors;
    const double factor = spec.noise_factors[k % n_factors];
    NoiseProfile p = scale_profile(*bases[i], factor);
    p.noise_scale = factor;
    Sample s = label_sample(*circuits[i], p, spec.shots, derive_seed(derive_seed(master_seed, kShotStream), k),
                            spec.with_fidelity);
    s.noise_factor = factor;
    s.circuit_id = i;
    labelled[k] = std::move(s);
  });

  Dataset d;
  d.spec = spec;
  d.master_seed = master_seed;
  d.samples.reserve(n_samples);
  for (auto &s : labelled) d.samples.push_back(std::move(*s));
  d.split = assign_splits(n_samples, derive_seed(master_seed, kSplitStream));
  return d;
}

Dataset resample_shots(const Dataset &d, uint64_t shots, uint64_t seed) {
  Dataset out = d;
  out.spec.shots = shots;
  for (size_t k = 0; k < out.samples.size(); ++k) {
    Sample &s = out.samples[k];
    s.shots = shots;
    s.pst = shots == kExactShots ? s.pst_exact : sample_pst(s.pst_exact, shots, derive_seed(seed, k));
  }
  return out;
}

nlohmann::json sample_to_json(const Sample &s, Split split) {
  nlohmann::json j;
  j["circuit"] = circuit_to_json(s.circuit);
  j["profile"] = profile_to_json(s.profile);
  j["shots"] = s.shots;
  j["pst"] = s.pst;
  j["pst_exact"] = s.pst_exact;
  if (s.fidelity) j["fidelity"] = *s.fidelity;
  j["noise_factor"] = s.noise_factor;
  j["circuit_id"] = s.circuit_id;
  j["split"] = split_name(split);
  return j;
}

Sample sample_from_json(const nlohmann::json &j, Split *split) {
  try {
    Sample s{circuit_from_json(j.at("circuit")), profile_from_json(j.at("profile")), j.at("shots").get<uint64_t>(),
             j.at("pst").get<double>(), 0.0, std::nullopt, 1.0, 0};
    s.pst_exact = j.value("pst_exact", s.pst);
    if (j.contains("fidelity") && !j["fidelity"].is_null()) s.fidelity = j["fidelity"].get<double>();
    s.noise_factor = j.value("noise_factor", s.profile.noise_scale);
    s.circuit_id = j.value("circuit_id", uint64_t{0});
    if (!(s.pst >= 0.0 && s.pst <= 1.0)) throw Error(ErrorKind::InvalidProbability, "pst outside [0,1]");
    for (const Gate &g : s.circuit.gates()) {
      if (!g.is_basis()) throw Error(ErrorKind::InvalidGate, "stored circuits may only use basis gates");
    }
    if (split) *split = split_from_name(j.value("split", std::string("train")));
    return s;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("sample JSON: ") + e.what());
  }
}

std::string to_jsonl(const Dataset &d) {
  std::string out;
  for (size_t i = 0; i < d.samples.size(); ++i) {
    out += sample_to_json(d.samples[i], d.split[i]).dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const Dataset &d, const std::filesystem::path &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  f << to_jsonl(d);
  if (!f) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

Dataset read_jsonl(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  Dataset d;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Split s = Split::Train;
    d.samples.push_back(sample_from_json(j, &s));
    d.split.push_back(s);
  }
  return d;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Small builder that lowers common gates onto the basis set. Global phases
// are dropped.
class BasisBuilder {
 public:
  explicit BasisBuilder(size_t n) : n_(n) {}

  BasisBuilder &rz(uint32_t q, double t) { return push(Gate::rz(q, t)); }
  BasisBuilder &sx(uint32_t q) { return push(Gate::sx(q)); }
  BasisBuilder &x(uint32_t q) { return push(Gate::x(q)); }
  BasisBuilder &cx(uint32_t c, uint32_t t) { return push(Gate::cnot(c, t)); }
  BasisBuilder &h(uint32_t q) { return rz(q, kPi / 2).sx(q).rz(q, kPi / 2); }
  BasisBuilder &cz(uint32_t a, uint32_t b) { return h(b).cx(a, b).h(b); }
  // RX(t) = H RZ(t) H.
  BasisBuilder &rx(uint32_t q, double t) { return h(q).rz(q, t).h(q); }
  // RY(t) = RZ(pi/2) RX(t) RZ(-pi/2) in circuit order RZ(-pi/2), RX, RZ(pi/2).
  BasisBuilder &ry(uint32_t q, double t) { return rz(q, -kPi / 2).rx(q, t).rz(q, kPi / 2); }
  // Controlled phase, equal to diag(1, 1, 1, e^{i t}) up to global phase.
  BasisBuilder &cp(uint32_t a, uint32_t b, double t) { return rz(a, t / 2).cx(a, b).rz(b, -t / 2).cx(a, b).rz(b, t / 2); }
  // exp(-i t/2 Z_a Z_b).
  BasisBuilder &rzz(uint32_t a, uint32_t b, double t) { return cx(a, b).rz(b, t).cx(a, b); }

  Circuit build(CouplingMap coupling) const { return simplify(Circuit(n_, gates_, std::move(coupling))); }

 private:
  BasisBuilder &push(Gate g) {
    gates_.push_back(std::move(g));
    return *this;
  }
  size_t n_;
  std::vector<Gate> gates_;
};

}  // namespace

std::vector<NamedCircuit> algorithm_circuits() {
  std::vector<NamedCircuit> out;

  out.push_back({"ghz_3", BasisBuilder(3).h(0).cx(0, 1).cx(1, 2).build(make_topology(Topology::Line, 3))});

  {
    BasisBuilder b(3);
    b.h(2).cp(1, 2, kPi / 2).cp(0, 2, kPi / 4);
    b.h(1).cp(0, 1, kPi / 2);
    b.h(0);
    b.cx(0, 2).cx(2, 0).cx(0, 2);  // swap to restore qubit order
    out.push_back({"qft_3", b.build(make_coupling({{0, 1}, {1, 2}, {0, 2}}))});
  }

  {
    // Marks |11>, one Grover iteration finds it with certainty.
    BasisBuilder b(2);
    b.h(0).h(1);
    b.cz(0, 1);
    b.h(0).h(1).x(0).x(1).cz(0, 1).x(0).x(1).h(0).h(1);
    out.push_back({"grover_2", b.build(make_topology(Topology::Line, 2))});
  }

  {
    const double gamma = 0.7;
    const double beta = 0.35;
    BasisBuilder b(4);
    for (uint32_t q = 0; q < 4; ++q) b.h(q);
    for (uint32_t q = 0; q < 4; ++q) b.rzz(q, (q + 1) % 4, 2 * gamma);
    for (uint32_t q = 0; q < 4; ++q) b.rx(q, 2 * beta);
    out.push_back({"qaoa_maxcut_ring_4", b.build(make_topology(Topology::Ring, 4))});
  }

  {
    // Deferred-measurement teleportation of RY(0.9) RZ(0.4)|0> from qubit 0
    // to qubit 2.
    BasisBuilder b(3);
    b.ry(0, 0.9).rz(0, 0.4);
    b.h(1).cx(1, 2);
    b.cx(0, 1).h(0);
    b.cx(1, 2).cz(0, 2);
    out.push_back({"teleportation_3", b.build(make_topology(Topology::Ring, 3))});
  }

  {
    const double angles[2][4][2] = {{{0.3, 1.1}, {0.7, 2.0}, {1.4, 0.2}, {2.2, 0.9}},
                                    {{0.5, 1.7}, {1.9, 0.4}, {0.8, 2.6}, {1.2, 1.5}}};
    BasisBuilder b(4);
    for (const auto &layer : angles) {
      for (uint32_t q = 0; q < 4; ++q) b.ry(q, layer[q][0]).rz(q, layer[q][1]);
      for (uint32_t q = 0; q + 1 < 4; ++q) b.cx(q, q + 1);
    }
    out.push_back({"vqe_hea_4", b.build(make_topology(Topology::Line, 4))});
  }

  return out;
}

}  // namespace qrel

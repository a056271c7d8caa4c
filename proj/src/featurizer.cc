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

#include "qrel/featurizer.h"

#include <cmath>

#include "qrel/error.h"

namespace qrel {

NodeFeatureMatrix node_features(const CircuitGraph &g, const Circuit &c, const NoiseProfile &p) {
  if (p.n_qubits() != c.n_qubits() || g.n_qubits != c.n_qubits()) {
    throw Error(ErrorKind::ProfileMismatch, "profile covers " + std::to_string(p.n_qubits()) + " qubits, circuit has " +
                                                std::to_string(c.n_qubits()));
  }
  NodeFeatureMatrix f = NodeFeatureMatrix::Zero(static_cast<Eigen::Index>(g.size()), kNodeFeatureDim);
  for (size_t i = 0; i < g.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const GraphNode &node = g.nodes[i];
    auto coherence = [&](uint32_t q, size_t t1_slot, size_t t2_slot) {
      f(row, t1_slot) = p.t1_us[q];
      f(row, t2_slot) = p.t2_us[q];
    };
    f(row, slot::kTopoIndex) = g.topo_index[i];

    if (node.kind == NodeKind::INPUT || node.kind == NodeKind::MEASURE) {
      const uint32_t q = node.qubit;
      f(row, node.kind == NodeKind::INPUT ? slot::kTypeInput : slot::kTypeMeasure) = 1.0;
      f(row, slot::kQubitBase + q) = 1.0;
      coherence(q, slot::kT1First, slot::kT2First);
      if (node.kind == NodeKind::MEASURE) {
        f(row, slot::kReadout10) = p.readout_error10[q];
        f(row, slot::kReadout01) = p.readout_error01[q];
      }
      continue;
    }

    const Gate &gate = c.gates()[static_cast<size_t>(node.gate_index)];
    size_t type_slot = slot::kTypeRZ;
    switch (gate.kind) {
      case GateKind::RZ: type_slot = slot::kTypeRZ; break;
      case GateKind::X: type_slot = slot::kTypeX; break;
      case GateKind::SX:
      case GateKind::SXDG: type_slot = slot::kTypeSX; break;
      case GateKind::CNOT: type_slot = slot::kTypeCNOT; break;
      default: throw Error(ErrorKind::InvalidGate, "no node feature encoding for " + gate_kind_name(gate.kind));
    }
    f(row, type_slot) = 1.0;
    for (uint32_t q : gate.qubits) f(row, slot::kQubitBase + q) = 1.0;
    coherence(gate.qubits[0], slot::kT1First, slot::kT2First);
    if (gate.qubits.size() == 2) coherence(gate.qubits[1], slot::kT1Second, slot::kT2Second);
    f(row, slot::kGateError) = p.gate_error(gate);
  }
  return f;
}

Eigen::VectorXd global_features(const Circuit &c) {
  const GlobalStats s = circuit_stats(c);
  Eigen::VectorXd v(kGlobalFeatureDim);
  v << static_cast<double>(s.depth), static_cast<double>(s.width), static_cast<double>(s.counts.rz),
      static_cast<double>(s.counts.x), static_cast<double>(s.counts.sx), static_cast<double>(s.counts.cnot);
  return v;
}

Eigen::VectorXd simple_nn_features(const Circuit &c) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kBaselineFeatureDim);
  v.head(kGlobalFeatureDim) = global_features(c);
  constexpr Eigen::Index kPerQubit = kGlobalFeatureDim;
  constexpr Eigen::Index kPairGrid = kPerQubit + kMaxQubits;
  for (const Gate &g : c.gates()) {
    if (g.kind == GateKind::BARRIER || g.kind == GateKind::MEASURE) continue;
    if (g.qubits.size() == 1) {
      v(kPerQubit + g.qubits[0]) += 1.0;
    } else {
      v(kPairGrid + g.qubits[0] * kMaxQubits + g.qubits[1]) += 1.0;
    }
  }
  return v;
}

std::string feature_group_name(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::None: return "none";
    case FeatureGroup::GateError: return "gate_error";
    case FeatureGroup::GateIndex: return "gate_index";
    case FeatureGroup::GateType: return "gate_type";
    case FeatureGroup::QubitIndex: return "qubit_index";
    case FeatureGroup::T1T2: return "t1t2";
  }
  return "?";
}

FeatureGroup feature_group_from_name(const std::string &name) {
  for (FeatureGroup g : {FeatureGroup::None, FeatureGroup::GateError, FeatureGroup::GateIndex, FeatureGroup::GateType,
                         FeatureGroup::QubitIndex, FeatureGroup::T1T2}) {
    if (feature_group_name(g) == name) return g;
  }
  throw Error(ErrorKind::ParseError, "unknown feature group '" + name + "'");
}

std::vector<size_t> feature_group_slots(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::None: return {};
    case FeatureGroup::GateError: return {slot::kGateError};
    case FeatureGroup::GateIndex: return {slot::kTopoIndex};
    case FeatureGroup::GateType: return {0, 1, 2, 3, 4, 5};
    case FeatureGroup::QubitIndex: return {6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    case FeatureGroup::T1T2: return {slot::kT1First, slot::kT2First, slot::kT1Second, slot::kT2Second};
  }
  return {};
}

void drop_feature_group(NodeFeatureMatrix &features, FeatureGroup g) {
  for (size_t s : feature_group_slots(g)) features.col(static_cast<Eigen::Index>(s)).setZero();
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd> &data) {
  Standardizer s;
  const double n = static_cast<double>(data.rows());
  s.mean = data.colwise().mean().transpose();
  s.std.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double var = (data.col(j).array() - s.mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.std(j) = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

void Standardizer::apply(Eigen::Ref<Eigen::MatrixXd> rows) const {
  if (rows.cols() != mean.size()) throw Error(ErrorKind::ShapeMismatch, "standardizer width mismatch");
  rows = (rows.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

void Standardizer::invert(Eigen::Ref<Eigen::MatrixXd> rows) const {
  if (rows.cols() != mean.size()) throw Error(ErrorKind::ShapeMismatch, "standardizer width mismatch");
  rows = (rows.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
}

Eigen::VectorXd Standardizer::transform(const Eigen::VectorXd &v) const {
  if (v.size() != mean.size()) throw Error(ErrorKind::ShapeMismatch, "standardizer width mismatch");
  return ((v - mean).array() / std.array()).matrix();
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
          {"std", std::vector<double>(std.data(), std.data() + std.size())}};
}

Standardizer Standardizer::from_json(const nlohmann::json &j) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto s = j.at("std").get<std::vector<double>>();
  if (m.size() != s.size()) throw Error(ErrorKind::ShapeMismatch, "normalizer mean/std length mismatch");
  Standardizer out;
  out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  out.std = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  return out;
}

nlohmann::json Normalizer::to_json() const {
  return {{"node", node.to_json()}, {"global", global.to_json()}, {"baseline", baseline.to_json()}};
}

Normalizer Normalizer::from_json(const nlohmann::json &j) {
  try {
    return {Standardizer::from_json(j.at("node")), Standardizer::from_json(j.at("global")),
            Standardizer::from_json(j.at("baseline"))};
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("normalizer JSON: ") + e.what());
  }
}

FeaturizedSample featurize(const Circuit &c, const NoiseProfile &p, double target, FeatureGroup dropped) {
  const CircuitGraph g = to_dag(c);
  FeaturizedSample s;
  s.neighbors = g.neighbor_sets();
  s.nodes = node_features(g, c, p);
  drop_feature_group(s.nodes, dropped);
  s.global = global_features(c);
  s.baseline = simple_nn_features(c);
  s.target = target;
  return s;
}

Normalizer fit_normalizer(std::span<const FeaturizedSample> train) {
  if (train.size() < 2) throw Error(ErrorKind::EmptyTrainingSet, "normalizer needs at least two training samples");
  Eigen::Index rows = 0;
  for (const auto &s : train) rows += s.nodes.rows();
  Eigen::MatrixXd nodes(rows, kNodeFeatureDim);
  Eigen::MatrixXd global(static_cast<Eigen::Index>(train.size()), kGlobalFeatureDim);
  Eigen::MatrixXd baseline(static_cast<Eigen::Index>(train.size()), kBaselineFeatureDim);
  Eigen::Index at = 0;
  for (size_t i = 0; i < train.size(); ++i) {
    const auto &s = train[i];
    nodes.middleRows(at, s.nodes.rows()) = s.nodes;
    at += s.nodes.rows();
    global.row(static_cast<Eigen::Index>(i)) = s.global.transpose();
    baseline.row(static_cast<Eigen::Index>(i)) = s.baseline.transpose();
  }
  return {Standardizer::fit(nodes), Standardizer::fit(global), Standardizer::fit(baseline)};
}

FeaturizedSample normalize(const FeaturizedSample &s, const Normalizer &n) {
  if (n.empty()) throw Error(ErrorKind::NormalizerMissing, "features need a fitted normalizer");
  FeaturizedSample out = s;
  n.node.apply(out.nodes);
  out.global = n.global.transform(s.global);
  out.baseline = n.baseline.transform(s.baseline);
  return out;
}

}  // namespace qrel

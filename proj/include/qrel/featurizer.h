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

#ifndef QREL_FEATURIZER_H
#define QREL_FEATURIZER_H

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qrel/circuit.h"
#include "qrel/noise_model.h"

namespace qrel {

constexpr size_t kNodeFeatureDim = 24;
constexpr size_t kGlobalFeatureDim = 6;
constexpr size_t kBaselineFeatureDim = 116;

/// Node feature slot layout.
namespace slot {
constexpr size_t kTypeInput = 0;
constexpr size_t kTypeMeasure = 1;
constexpr size_t kTypeRZ = 2;
constexpr size_t kTypeX = 3;
constexpr size_t kTypeSX = 4;
constexpr size_t kTypeCNOT = 5;
constexpr size_t kQubitBase = 6;
constexpr size_t kT1First = 16;
constexpr size_t kT2First = 17;
constexpr size_t kT1Second = 18;
constexpr size_t kT2Second = 19;
constexpr size_t kGateError = 20;
constexpr size_t kReadout10 = 21;
constexpr size_t kReadout01 = 22;
constexpr size_t kTopoIndex = 23;
}  // namespace slot

using NodeFeatureMatrix = Eigen::MatrixXd;

/// K x 24 matrix aligned with the graph's node order. Throws
/// Error{ProfileMismatch} when the profile covers a different qubit count.
NodeFeatureMatrix node_features(const CircuitGraph &g, const Circuit &c, const NoiseProfile &p);

/// [depth, width, #RZ, #X, #SX, #CNOT].
Eigen::VectorXd global_features(const Circuit &c);

/// [depth, width] + counts of RZ, X, SX, CNOT + single-qubit gates per
/// qubit (10) + CNOTs per ordered (control, target) pair on a 10 x 10 grid.
Eigen::VectorXd simple_nn_features(const Circuit &c);

/// Node-feature groups that can be removed for ablations.
enum class FeatureGroup { None, GateError, GateIndex, GateType, QubitIndex, T1T2 };

std::string feature_group_name(FeatureGroup g);
FeatureGroup feature_group_from_name(const std::string &name);
std::vector<size_t> feature_group_slots(FeatureGroup g);

/// Sets every slot of the group to zero.
void drop_feature_group(NodeFeatureMatrix &features, FeatureGroup g);

/// Per-column affine standardizer.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  bool empty() const { return mean.size() == 0; }
  /// Fits on rows of `data`; std below 1e-12 is replaced by 1.
  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd> &data);
  void apply(Eigen::Ref<Eigen::MatrixXd> rows) const;
  void invert(Eigen::Ref<Eigen::MatrixXd> rows) const;
  Eigen::VectorXd transform(const Eigen::VectorXd &v) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json &j);
  bool operator==(const Standardizer &o) const { return mean == o.mean && std == o.std; }
};

/// Statistics for node, global and baseline features, fit on the training
/// split only and applied unchanged to validation and test data.
struct Normalizer {
  Standardizer node;
  Standardizer global;
  Standardizer baseline;

  bool empty() const { return node.empty(); }
  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json &j);
  bool operator==(const Normalizer &) const = default;
};

/// Raw (unnormalized) features of one labelled circuit.
struct FeaturizedSample {
  std::vector<std::vector<uint32_t>> neighbors;
  NodeFeatureMatrix nodes;
  Eigen::VectorXd global;
  Eigen::VectorXd baseline;
  double target = 0.0;
};

FeaturizedSample featurize(const Circuit &c, const NoiseProfile &p, double target,
                           FeatureGroup dropped = FeatureGroup::None);

/// Throws Error{EmptyTrainingSet} for fewer than two training samples.
Normalizer fit_normalizer(std::span<const FeaturizedSample> train);

/// Returns a copy with every feature block standardized.
FeaturizedSample normalize(const FeaturizedSample &s, const Normalizer &n);

}  // namespace qrel

#endif  // QREL_FEATURIZER_H

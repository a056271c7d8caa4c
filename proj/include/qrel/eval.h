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

#ifndef QREL_EVAL_H
#define QREL_EVAL_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrel/dataset.h"
#include "qrel/featurizer.h"
#include "qrel/model.h"
#include "qrel/training.h"

namespace qrel {

struct MetricsReport {
  double rmse = 0.0;
  /// NaN when the targets have zero variance; see r2_defined.
  double r2 = 0.0;
  bool r2_defined = true;
  double spearman = 0.0;
  size_t n = 0;
  std::vector<std::pair<double, double>> pairs;  // (target, prediction)

  /// Throws Error{ZeroVariance} when R^2 is undefined.
  double require_r2() const;
};

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

/// RMSE, R^2 about the target mean, and Spearman correlation. Throws
/// Error{EmptyInput} / Error{ShapeMismatch}.
MetricsReport compute_metrics(std::span<const double> targets, std::span<const double> predictions);

std::string scatter_csv(const MetricsReport &r);

/// Raw features of every sample, label = stored PST.
std::vector<FeaturizedSample> featurize_dataset(const Dataset &d, FeatureGroup dropped = FeatureGroup::None,
                                                size_t workers = 1);

/// Features of one split, normalized with `n`.
std::vector<FeaturizedSample> split_features(const Dataset &d, std::span<const FeaturizedSample> raw, Split split,
                                             const Normalizer *n);

/// Clamps predictions to [0, 1] and scores them on the requested split.
/// Throws Error{EmptySplit}.
MetricsReport evaluate(const GtModel &m, const Dataset &d, Split split, FeatureGroup dropped = FeatureGroup::None);
MetricsReport evaluate(const SimpleNn &m, const Dataset &d, Split split);
MetricsReport evaluate_predictions(const Eigen::VectorXd &raw_predictions, const Eigen::VectorXd &targets);

template <typename Model>
struct ExperimentResult {
  TrainReport<Model> report;
  MetricsReport test;
};

/// Fits the normalizer on the training split, trains and scores the best
/// checkpoint on the test split.
ExperimentResult<GtModel> run_gt_experiment(const Dataset &d, const ModelConfig &model, const TrainConfig &train,
                                            FeatureGroup dropped, uint64_t init_seed);
ExperimentResult<SimpleNn> run_nn_experiment(const Dataset &d, const TrainConfig &train, uint64_t init_seed);

struct AblationSpec {
  std::string label;
  bool use_global_features = true;
  FeatureGroup drop_feature_group = FeatureGroup::None;
  size_t n_layers = 2;
  /// Re-draw labels with this shot count; nullopt keeps the stored labels.
  std::optional<uint64_t> shots;
};

struct AblationRow {
  AblationSpec spec;
  size_t best_epoch = 0;
  double val_rmse = 0.0;
  MetricsReport test;
};

/// Global features on/off, each of the five feature-group drops, layers
/// {1, 2, 3} and shots {512, 1024, 2048, 4096}.
std::vector<AblationSpec> standard_ablation_specs();
AblationSpec ablation_spec_from_json(const nlohmann::json &j);

AblationRow run_ablation(const Dataset &d, const AblationSpec &spec, const TrainConfig &train, uint64_t seed);
std::string ablation_csv(std::span<const AblationRow> rows);

struct BenchCase {
  Circuit circuit;
  NoiseProfile profile;
};

struct BenchReport {
  size_t n_circuits = 0;
  double simulation_latency_s = 0.0;
  std::vector<std::pair<size_t, double>> predictor_latency_s;  // (batch size, seconds per circuit)

  double speedup(size_t batch_size) const;
};

/// Mean wall-clock per circuit of noisy density-matrix PST versus
/// featurize + forward at each batch size. Single-threaded.
BenchReport bench_runtime(std::span<const BenchCase> cases, const GtModel &m, std::span<const size_t> batch_sizes);
std::string bench_csv(const BenchReport &r);

struct CorrelationReport {
  std::vector<double> pst;
  std::vector<double> fidelity;
  double spearman = 0.0;
};

/// Exact PST (with readout) and state fidelity of `n_circuits` random
/// circuits under every noise factor in `spec`.
CorrelationReport correlate_pst_fidelity(const GenSpec &spec, size_t n_circuits, uint64_t seed, size_t workers = 1);
std::string correlation_csv(const CorrelationReport &r);

}  // namespace qrel

#endif  // QREL_EVAL_H

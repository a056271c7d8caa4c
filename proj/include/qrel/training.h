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

#ifndef QREL_TRAINING_H
#define QREL_TRAINING_H

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qrel/model.h"

namespace qrel {

struct TrainConfig {
  size_t epochs = 500;
  double learning_rate = 1e-2;
  double weight_decay = 1e-4;
  /// Capped at the training-set size.
  size_t batch_size = 2500;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;

  bool operator==(const TrainConfig &) const = default;
};

void validate_train_config(const TrainConfig &c);
nlohmann::json train_config_to_json(const TrainConfig &c);
TrainConfig train_config_from_json(const nlohmann::json &j);

/// Mean of squared differences. Throws Error{EmptyBatch} on empty input and
/// Error{ShapeMismatch} on unequal lengths.
double mse_loss(std::span<const double> predictions, std::span<const double> targets);

template <typename Params>
struct LossAndGrad {
  double loss = 0.0;
  Params grad;
};

/// Exact gradients of the batch-mean MSE with respect to every parameter.
/// Throws Error{NonFiniteActivation} if the forward pass produces NaN/inf.
LossAndGrad<GtParams> backward(const GtModel &m, const GraphBatch &batch);

struct BaselineBatch {
  Eigen::MatrixXd features;  // B x 116, normalized
  Eigen::VectorXd targets;
};

BaselineBatch make_baseline_batch(std::span<const FeaturizedSample *const> samples);
LossAndGrad<NnParams> backward(const SimpleNn &m, const BaselineBatch &batch);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  size_t t = 0;
};

/// One Adam update with bias correction. Weight decay is coupled L2: the
/// gradient becomes g + weight_decay * param before the moment updates.
/// `t` is the 1-based step number.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state, const TrainConfig &config,
               size_t t);

template <typename Model>
struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_rmse;
  size_t best_epoch = 0;
  double best_val_rmse = 0.0;
  Model best;
};

/// Samples must already be normalized with the model's normalizer. Shuffles
/// the training split every epoch, steps Adam per batch, evaluates the
/// validation RMSE after each epoch and returns the best-validation model.
TrainReport<GtModel> train(const GtModel &initial, std::span<const FeaturizedSample> train_set,
                           std::span<const FeaturizedSample> val_set, const TrainConfig &config);
TrainReport<SimpleNn> train(const SimpleNn &initial, std::span<const FeaturizedSample> train_set,
                            std::span<const FeaturizedSample> val_set, const TrainConfig &config);

/// "epoch,train_mse,val_rmse" with one row per epoch.
template <typename Model>
std::string history_csv(const TrainReport<Model> &r);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  size_t checked = 0;
  /// Entries whose perturbation flipped a ReLU and so have no valid
  /// finite-difference estimate.
  size_t skipped = 0;
};

/// Compares backward() with Richardson-extrapolated central differences
/// (steps `step` and `step / 2`) on every parameter whose name starts with
/// one of `prefixes` (all when empty). The relative error of one entry is |a - n| / max(|a|, |n|, floor) with
/// floor = 1e-6; tiny gradients are judged on absolute terms there.
/// Throws Error{InvalidStep} unless step > 0.
GradCheckResult grad_check(const GtModel &m, const GraphBatch &batch, double step,
                           const std::vector<std::string> &prefixes = {});

/// A model with random weights and a random graph of five nodes (two qubits,
/// one gate) with Gaussian node and global features, for gradient checks.
struct GradCheckInstance {
  GtModel model;
  GraphBatch batch;
};
GradCheckInstance random_grad_check_instance(uint64_t seed);

}  // namespace qrel

#endif  // QREL_TRAINING_H

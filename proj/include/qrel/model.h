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

#ifndef QREL_MODEL_H
#define QREL_MODEL_H

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qrel/featurizer.h"

namespace qrel {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kCheckpointVersion = 1;

struct ModelConfig {
  size_t n_layers = 2;
  size_t feature_dim = kNodeFeatureDim;
  size_t global_dim = kGlobalFeatureDim;
  size_t global_hidden = 12;
  size_t regressor_hidden = 128;
  bool use_global_features = true;
  double layer_norm_eps = 1e-5;

  size_t regressor_input() const { return feature_dim + (use_global_features ? global_hidden : 0); }
  bool operator==(const ModelConfig &) const = default;
};

/// Throws Error{InvalidConfig}.
void validate_config(const ModelConfig &c);
nlohmann::json config_to_json(const ModelConfig &c);
ModelConfig config_from_json(const nlohmann::json &j);

/// y = W x + b with W stored out x in.
struct Dense {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

struct AttentionParams {
  Eigen::MatrixXd w_q;
  Eigen::MatrixXd w_k;
  Eigen::MatrixXd w_v;
  Eigen::VectorXd ln_gain;
  Eigen::VectorXd ln_bias;
};

/// Named view of one parameter tensor.
struct ParamView {
  std::string name;
  std::span<double> data;
  std::vector<size_t> shape;
};

/// Graph transformer weights. Also used as the gradient container, since a
/// gradient has exactly the parameter shapes.
struct GtParams {
  std::vector<AttentionParams> layers;
  Dense global1;  // absent (0 x 0) when global features are disabled
  Dense global2;
  Dense reg1;
  Dense reg2;
  Dense reg3;

  /// Deterministic order; Adam state and checkpoints rely on it.
  std::vector<ParamView> views();
  size_t parameter_count();
  GtParams zeros_like() const;
};

struct GtModel {
  ModelConfig config;
  GtParams params;
  Normalizer normalizer;
};

/// Baseline: three fully connected layers on the 116 circuit-level features.
struct NnParams {
  Dense fc1;
  Dense fc2;
  Dense fc3;

  std::vector<ParamView> views();
  size_t parameter_count();
  NnParams zeros_like() const;
};

struct SimpleNn {
  size_t hidden = 128;
  NnParams params;
  Normalizer normalizer;
};

/// Weights ~ U[-sqrt(1/fan_in), sqrt(1/fan_in)], biases 0, layer-norm gain 1.
GtModel init_model(const ModelConfig &config, uint64_t seed);
SimpleNn init_simple_nn(uint64_t seed, size_t hidden = 128);

/// Compressed adjacency: neighbors of node i are index[offsets[i]..offsets[i+1]).
struct NeighborSets {
  std::vector<uint32_t> offsets{0};
  std::vector<uint32_t> index;

  size_t size() const { return offsets.size() - 1; }
  std::span<const uint32_t> of(size_t i) const {
    return {index.data() + offsets[i], index.data() + offsets[i + 1]};
  }
  /// Appends per-node lists, shifting node ids by `base`.
  void append(const std::vector<std::vector<uint32_t>> &lists, uint32_t base);
  static NeighborSets from_lists(const std::vector<std::vector<uint32_t>> &lists);
};

/// Several graphs stacked into one node matrix. Features must already be
/// normalized.
struct GraphBatch {
  RowMatrix nodes;
  NeighborSets neighbors;
  std::vector<uint32_t> graph_offsets{0};
  Eigen::MatrixXd global;  // B x 6
  Eigen::VectorXd targets;

  size_t size() const { return graph_offsets.size() - 1; }
};

GraphBatch make_graph_batch(std::span<const FeaturizedSample *const> samples);
GraphBatch make_graph_batch(std::span<const FeaturizedSample> samples);

/// Intermediate values of one attention layer, kept for backpropagation.
struct AttentionCache {
  RowMatrix input;
  RowMatrix q, k, v;
  std::vector<double> probs;  // aligned with NeighborSets::index
  RowMatrix attended;         // sum_j prob_ij V_j
  RowMatrix xhat;             // normalized residual
  Eigen::VectorXd inv_std;
  RowMatrix output;           // gain * xhat + bias
};

/// One layer: neighbor attention with scores scaled by 1/sqrt(|N_i|),
/// residual connection, then layer norm over the feature dimension.
void attention_forward(const RowMatrix &h, const NeighborSets &nb, const AttentionParams &p, double eps,
                       AttentionCache &cache);

struct DenseCache {
  Eigen::MatrixXd input;  // B x in
  Eigen::MatrixXd pre;    // B x out
  Eigen::MatrixXd out;    // B x out (after activation, if any)
};

struct GtForwardCache {
  std::vector<AttentionCache> layers;
  Eigen::MatrixXd pooled;  // B x D
  DenseCache global1, global2, reg1, reg2, reg3;
  Eigen::VectorXd predictions;
};

void dense_forward(const Dense &d, const Eigen::MatrixXd &x, bool relu, DenseCache &cache);

/// Raw (unclamped) predictions for every graph of the batch.
Eigen::VectorXd forward(const GtModel &m, const GraphBatch &batch, GtForwardCache *cache = nullptr);

struct NnForwardCache {
  DenseCache fc1, fc2, fc3;
};

/// `x` is B x 116, already normalized.
Eigen::VectorXd simple_nn_forward(const SimpleNn &m, const Eigen::MatrixXd &x, NnForwardCache *cache = nullptr);

/// Normalizes raw featurized samples with the model's statistics and runs
/// the model. Throws Error{NormalizerMissing} without statistics.
Eigen::VectorXd predict_raw(const GtModel &m, std::span<const FeaturizedSample> raw);
Eigen::VectorXd predict_raw(const SimpleNn &m, std::span<const FeaturizedSample> raw);

/// Featurize + forward for one circuit; the result is clamped to [0, 1].
double predict_pst(const GtModel &m, const Circuit &c, const NoiseProfile &p);

nlohmann::json checkpoint_to_json(const GtModel &m);
nlohmann::json checkpoint_to_json(const SimpleNn &m);
GtModel gt_from_checkpoint(const nlohmann::json &j);
SimpleNn nn_from_checkpoint(const nlohmann::json &j);
/// "graph_transformer" or "simple_nn".
std::string checkpoint_kind(const nlohmann::json &j);

void save_json(const nlohmann::json &j, const std::filesystem::path &path);
nlohmann::json load_json(const std::filesystem::path &path);

}  // namespace qrel

#endif  // QREL_MODEL_H

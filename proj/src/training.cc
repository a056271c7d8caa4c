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

#include "qrel/training.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qrel/error.h"
#include "qrel/random.h"

namespace qrel {

void validate_train_config(const TrainConfig &c) {
  auto fail = [](const std::string &what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (c.epochs < 1) fail("epochs must be positive");
  if (!(c.learning_rate > 0)) fail("learning_rate must be positive");
  if (!(c.weight_decay >= 0)) fail("weight_decay must be non-negative");
  if (c.batch_size < 1) fail("batch_size must be positive");
  if (!(c.beta1 >= 0 && c.beta1 < 1) || !(c.beta2 >= 0 && c.beta2 < 1)) fail("Adam betas must lie in [0,1)");
  if (!(c.epsilon > 0)) fail("Adam epsilon must be positive");
}

nlohmann::json train_config_to_json(const TrainConfig &c) {
  return {{"epochs", c.epochs},         {"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size}, {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"epsilon", c.epsilon},       {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json &j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("training config JSON: ") + e.what());
  }
  validate_train_config(c);
  return c;
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw Error(ErrorKind::EmptyBatch, "loss of an empty batch");
  if (predictions.size() != targets.size()) throw Error(ErrorKind::ShapeMismatch, "predictions and targets differ in length");
  double sum = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

namespace {

double loss_of(const Eigen::VectorXd &pred, const Eigen::VectorXd &targets) {
  if (!pred.allFinite()) throw Error(ErrorKind::NonFiniteActivation, "forward pass produced a non-finite value");
  return mse_loss({pred.data(), static_cast<size_t>(pred.size())}, {targets.data(), static_cast<size_t>(targets.size())});
}

// Accumulates the parameter gradient of a dense layer and returns the
// gradient with respect to its input.
Eigen::MatrixXd dense_backward(const Dense &d, const DenseCache &cache, const Eigen::MatrixXd &d_out, bool relu,
                               Dense &grad) {
  Eigen::MatrixXd d_pre = d_out;
  if (relu) d_pre = d_pre.cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
  grad.w.noalias() += d_pre.transpose() * cache.input;
  grad.b += d_pre.colwise().sum().transpose();
  return d_pre * d.w;
}

// Backpropagates through one attention layer. Returns d(loss)/d(input).
RowMatrix attention_backward(const AttentionParams &p, const AttentionCache &c, const NeighborSets &nb,
                             const RowMatrix &d_out, AttentionParams &grad) {
  const Eigen::Index n = d_out.rows();
  const Eigen::Index d = d_out.cols();

  grad.ln_gain += d_out.cwiseProduct(c.xhat).colwise().sum().transpose();
  grad.ln_bias += d_out.colwise().sum().transpose();
  const RowMatrix d_xhat = d_out.array().rowwise() * p.ln_gain.transpose().array();

  RowMatrix d_res(n, d);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean_dx = d_xhat.row(i).sum() * inv_d;
    const double mean_dx_x = d_xhat.row(i).dot(c.xhat.row(i)) * inv_d;
    d_res.row(i) = c.inv_std(i) * (d_xhat.row(i).array() - mean_dx - c.xhat.row(i).array() * mean_dx_x);
  }

  RowMatrix d_q = RowMatrix::Zero(n, d);
  RowMatrix d_k = RowMatrix::Zero(n, d);
  RowMatrix d_v = RowMatrix::Zero(n, d);
  std::vector<double> d_prob;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto neighbors = nb.of(static_cast<size_t>(i));
    const double scale = 1.0 / std::sqrt(static_cast<double>(neighbors.size()));
    const double *prob = c.probs.data() + nb.offsets[static_cast<size_t>(i)];
    d_prob.resize(neighbors.size());
    double weighted = 0.0;
    for (size_t k = 0; k < neighbors.size(); ++k) {
      d_prob[k] = d_res.row(i).dot(c.v.row(neighbors[k]));
      weighted += prob[k] * d_prob[k];
      d_v.row(neighbors[k]) += prob[k] * d_res.row(i);
    }
    for (size_t k = 0; k < neighbors.size(); ++k) {
      const double d_score = prob[k] * (d_prob[k] - weighted) * scale;
      d_q.row(i) += d_score * c.k.row(neighbors[k]);
      d_k.row(neighbors[k]) += d_score * c.q.row(i);
    }
  }

  grad.w_q.noalias() += d_q.transpose() * c.input;
  grad.w_k.noalias() += d_k.transpose() * c.input;
  grad.w_v.noalias() += d_v.transpose() * c.input;

  RowMatrix d_in = d_res;
  d_in.noalias() += d_q * p.w_q;
  d_in.noalias() += d_k * p.w_k;
  d_in.noalias() += d_v * p.w_v;
  return d_in;
}

Eigen::MatrixXd loss_gradient(const Eigen::VectorXd &pred, const Eigen::VectorXd &targets) {
  const double scale = 2.0 / static_cast<double>(pred.size());
  return ((pred - targets) * scale);
}

}  // namespace

LossAndGrad<GtParams> backward(const GtModel &m, const GraphBatch &batch) {
  if (batch.size() == 0) throw Error(ErrorKind::EmptyBatch, "backward on an empty batch");
  GtForwardCache cache;
  const Eigen::VectorXd pred = forward(m, batch, &cache);
  LossAndGrad<GtParams> out{loss_of(pred, batch.targets), m.params.zeros_like()};
  GtParams &g = out.grad;
  const ModelConfig &cfg = m.config;

  const Eigen::MatrixXd d_pred = loss_gradient(pred, batch.targets);
  Eigen::MatrixXd d_x = dense_backward(m.params.reg3, cache.reg3, d_pred, false, g.reg3);
  d_x = dense_backward(m.params.reg2, cache.reg2, d_x, true, g.reg2);
  d_x = dense_backward(m.params.reg1, cache.reg1, d_x, true, g.reg1);

  const auto d = static_cast<Eigen::Index>(cfg.feature_dim);
  if (cfg.use_global_features) {
    const Eigen::MatrixXd d_g2 = d_x.rightCols(static_cast<Eigen::Index>(cfg.global_hidden));
    const Eigen::MatrixXd d_g1 = dense_backward(m.params.global2, cache.global2, d_g2, false, g.global2);
    dense_backward(m.params.global1, cache.global1, d_g1, true, g.global1);
  }

  RowMatrix d_h(batch.nodes.rows(), d);
  for (size_t b = 0; b < batch.size(); ++b) {
    const auto lo = batch.graph_offsets[b];
    const auto hi = batch.graph_offsets[b + 1];
    const Eigen::RowVectorXd share = d_x.row(static_cast<Eigen::Index>(b)).head(d) / static_cast<double>(hi - lo);
    for (auto r = lo; r < hi; ++r) d_h.row(r) = share;
  }
  for (size_t l = cfg.n_layers; l-- > 0;) {
    d_h = attention_backward(m.params.layers[l], cache.layers[l], batch.neighbors, d_h, g.layers[l]);
  }
  return out;
}

BaselineBatch make_baseline_batch(std::span<const FeaturizedSample *const> samples) {
  BaselineBatch b{Eigen::MatrixXd(static_cast<Eigen::Index>(samples.size()), kBaselineFeatureDim),
                  Eigen::VectorXd(static_cast<Eigen::Index>(samples.size()))};
  for (size_t i = 0; i < samples.size(); ++i) {
    b.features.row(static_cast<Eigen::Index>(i)) = samples[i]->baseline.transpose();
    b.targets(static_cast<Eigen::Index>(i)) = samples[i]->target;
  }
  return b;
}

LossAndGrad<NnParams> backward(const SimpleNn &m, const BaselineBatch &batch) {
  if (batch.targets.size() == 0) throw Error(ErrorKind::EmptyBatch, "backward on an empty batch");
  NnForwardCache cache;
  const Eigen::VectorXd pred = simple_nn_forward(m, batch.features, &cache);
  LossAndGrad<NnParams> out{loss_of(pred, batch.targets), m.params.zeros_like()};
  Eigen::MatrixXd d_x = dense_backward(m.params.fc3, cache.fc3, loss_gradient(pred, batch.targets), false, out.grad.fc3);
  d_x = dense_backward(m.params.fc2, cache.fc2, d_x, true, out.grad.fc2);
  dense_backward(m.params.fc1, cache.fc1, d_x, true, out.grad.fc1);
  return out;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state, const TrainConfig &config,
               size_t t) {
  if (t < 1) throw Error(ErrorKind::InvalidStep, "Adam steps are numbered from 1");
  if (params.size() != grads.size()) throw Error(ErrorKind::ShapeMismatch, "parameter and gradient sizes differ");
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  state.t = t;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + config.weight_decay * params[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

namespace {

std::vector<double> flatten(std::vector<ParamView> views) {
  std::vector<double> out;
  for (const auto &v : views) out.insert(out.end(), v.data.begin(), v.data.end());
  return out;
}

void scatter(std::span<const double> flat, std::vector<ParamView> views) {
  size_t at = 0;
  for (auto &v : views) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), v.data.size(), v.data.begin());
    at += v.data.size();
  }
}

double clamped_rmse(const Eigen::VectorXd &pred, const Eigen::VectorXd &targets) {
  const Eigen::VectorXd clipped = pred.cwiseMax(0.0).cwiseMin(1.0);
  return std::sqrt((clipped - targets).squaredNorm() / static_cast<double>(targets.size()));
}

struct GtOps {
  using Batch = GraphBatch;
  static Batch make(std::span<const FeaturizedSample *const> s) { return make_graph_batch(s); }
  static LossAndGrad<GtParams> grad(const GtModel &m, const Batch &b) { return backward(m, b); }
  static Eigen::VectorXd predict(const GtModel &m, const Batch &b) { return forward(m, b); }
  static const Eigen::VectorXd &targets(const Batch &b) { return b.targets; }
};

struct NnOps {
  using Batch = BaselineBatch;
  static Batch make(std::span<const FeaturizedSample *const> s) { return make_baseline_batch(s); }
  static LossAndGrad<NnParams> grad(const SimpleNn &m, const Batch &b) { return backward(m, b); }
  static Eigen::VectorXd predict(const SimpleNn &m, const Batch &b) { return simple_nn_forward(m, b.features); }
  static const Eigen::VectorXd &targets(const Batch &b) { return b.targets; }
};

template <typename Ops, typename Model>
TrainReport<Model> train_loop(const Model &initial, std::span<const FeaturizedSample> train_set,
                              std::span<const FeaturizedSample> val_set, const TrainConfig &config) {
  validate_train_config(config);
  if (train_set.empty()) throw Error(ErrorKind::EmptySplit, "training split is empty");
  if (val_set.empty()) throw Error(ErrorKind::EmptySplit, "validation split is empty");

  std::vector<const FeaturizedSample *> val_ptrs;
  for (const auto &s : val_set) val_ptrs.push_back(&s);
  const typename Ops::Batch val_batch = Ops::make(val_ptrs);

  Model model = initial;
  TrainReport<Model> report{{}, {}, 0, std::numeric_limits<double>::infinity(), initial};
  AdamState adam;
  size_t step = 0;
  const size_t n = train_set.size();
  const size_t batch_size = std::min(config.batch_size, n);
  std::vector<size_t> order(n);
  std::vector<const FeaturizedSample *> members;

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(config.seed, epoch));
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);

    double loss_sum = 0.0;
    for (size_t start = 0; start < n; start += batch_size) {
      const size_t stop = std::min(n, start + batch_size);
      members.clear();
      for (size_t k = start; k < stop; ++k) members.push_back(&train_set[order[k]]);
      const auto result = Ops::grad(model, Ops::make(members));
      loss_sum += result.loss * static_cast<double>(stop - start);

      auto grad = result.grad;
      std::vector<double> flat = flatten(model.params.views());
      const std::vector<double> flat_grad = flatten(grad.views());
      adam_step(flat, flat_grad, adam, config, ++step);
      scatter(flat, model.params.views());
    }
    report.train_loss.push_back(loss_sum / static_cast<double>(n));

    const Eigen::VectorXd pred = Ops::predict(model, val_batch);
    if (!pred.allFinite()) throw Error(ErrorKind::NonFiniteActivation, "validation predictions are not finite");
    const double rmse = clamped_rmse(pred, Ops::targets(val_batch));
    report.val_rmse.push_back(rmse);
    if (rmse < report.best_val_rmse) {
      report.best_val_rmse = rmse;
      report.best_epoch = epoch + 1;
      report.best = model;
    }
  }
  return report;
}

}  // namespace

TrainReport<GtModel> train(const GtModel &initial, std::span<const FeaturizedSample> train_set,
                           std::span<const FeaturizedSample> val_set, const TrainConfig &config) {
  return train_loop<GtOps>(initial, train_set, val_set, config);
}

TrainReport<SimpleNn> train(const SimpleNn &initial, std::span<const FeaturizedSample> train_set,
                            std::span<const FeaturizedSample> val_set, const TrainConfig &config) {
  return train_loop<NnOps>(initial, train_set, val_set, config);
}

template <typename Model>
std::string history_csv(const TrainReport<Model> &r) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_mse,val_rmse\n";
  for (size_t e = 0; e < r.train_loss.size(); ++e) out << e + 1 << ',' << r.train_loss[e] << ',' << r.val_rmse[e] << '\n';
  return out.str();
}

template std::string history_csv(const TrainReport<GtModel> &);
template std::string history_csv(const TrainReport<SimpleNn> &);

namespace {

// Sign pattern of every ReLU pre-activation. Finite differences are only a
// valid derivative estimate while this pattern stays fixed.
std::vector<bool> relu_pattern(const GtForwardCache &c, bool use_global) {
  std::vector<bool> out;
  auto add = [&](const Eigen::MatrixXd &pre) {
    for (Eigen::Index i = 0; i < pre.size(); ++i) out.push_back(pre.data()[i] > 0.0);
  };
  if (use_global) add(c.global1.pre);
  add(c.reg1.pre);
  add(c.reg2.pre);
  return out;
}

}  // namespace

GradCheckResult grad_check(const GtModel &m, const GraphBatch &batch, double step,
                           const std::vector<std::string> &prefixes) {
  if (!(step > 0) || !std::isfinite(step)) throw Error(ErrorKind::InvalidStep, "finite-difference step must be positive");
  constexpr double kFloor = 1e-6;
  const LossAndGrad<GtParams> analytic = backward(m, batch);
  GtParams grad = analytic.grad;
  auto grad_views = grad.views();

  GtModel probe = m;
  auto views = probe.params.views();
  const bool use_global = m.config.use_global_features;
  GtForwardCache cache;
  forward(probe, batch, &cache);
  const std::vector<bool> base_pattern = relu_pattern(cache, use_global);
  bool kink = false;
  auto loss_at = [&] {
    const Eigen::VectorXd pred = forward(probe, batch, &cache);
    kink = kink || relu_pattern(cache, use_global) != base_pattern;
    return loss_of(pred, batch.targets);
  };

  GradCheckResult result;
  for (size_t p = 0; p < views.size(); ++p) {
    const std::string &name = views[p].name;
    const bool selected =
        prefixes.empty() || std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string &pre) {
          return name.rfind(pre, 0) == 0;
        });
    if (!selected) continue;
    for (size_t i = 0; i < views[p].data.size(); ++i) {
      double &w = views[p].data[i];
      const double saved = w;
      kink = false;
      auto central = [&](double h) {
        w = saved + h;
        const double up = loss_at();
        w = saved - h;
        const double down = loss_at();
        return (up - down) / (2.0 * h);
      };
      const double coarse = central(step);
      const double fine = central(0.5 * step);
      w = saved;
      if (kink) {
        ++result.skipped;
        continue;
      }
      // Richardson extrapolation cancels the O(h^2) term.
      const double numeric = (4.0 * fine - coarse) / 3.0;
      const double exact = grad_views[p].data[i];
      const double rel = std::abs(exact - numeric) / std::max({std::abs(exact), std::abs(numeric), kFloor});
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_parameter = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

GradCheckInstance random_grad_check_instance(uint64_t seed) {
  Rng rng(mix_seed(seed));
  std::normal_distribution<double> normal(0.0, 1.0);

  const Gate choices[] = {Gate::x(0), Gate::sx(1), Gate::rz(0, 1.3), Gate::cnot(0, 1), Gate::cnot(1, 0)};
  const Gate gate = choices[uniform_index(rng, std::size(choices))];
  const Circuit c(2, {gate}, make_coupling({{0, 1}}));

  FeaturizedSample s;
  s.neighbors = to_dag(c).neighbor_sets();
  s.nodes = Eigen::MatrixXd(static_cast<Eigen::Index>(s.neighbors.size()), kNodeFeatureDim);
  for (Eigen::Index i = 0; i < s.nodes.size(); ++i) s.nodes.data()[i] = normal(rng);
  s.global = Eigen::VectorXd(kGlobalFeatureDim);
  for (Eigen::Index i = 0; i < s.global.size(); ++i) s.global(i) = normal(rng);
  s.target = uniform01(rng);

  GradCheckInstance inst{init_model(ModelConfig{}, rng()), make_graph_batch(std::span<const FeaturizedSample>(&s, 1))};
  // Off-default gains and biases so that every parameter group carries a
  // non-trivial gradient.
  for (auto &layer : inst.model.params.layers) {
    for (Eigen::Index i = 0; i < layer.ln_gain.size(); ++i) {
      layer.ln_gain(i) = uniform(rng, 0.5, 1.5);
      layer.ln_bias(i) = uniform(rng, -0.5, 0.5);
    }
  }
  for (Dense *d : {&inst.model.params.global1, &inst.model.params.global2, &inst.model.params.reg1,
                   &inst.model.params.reg2, &inst.model.params.reg3}) {
    for (Eigen::Index i = 0; i < d->b.size(); ++i) d->b(i) = uniform(rng, -0.1, 0.1);
  }
  return inst;
}

}  // namespace qrel

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

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

// Normalized-looking samples whose target is a linear function of the first
// global feature.
std::vector<FeaturizedSample> linear_samples(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FeaturizedSample> out;
  for (size_t i = 0; i < n; ++i) {
    const Circuit c = generate_random_circuit(GenSpec{}, derive_seed(seed, i));
    FeaturizedSample s;
    s.neighbors = to_dag(c).neighbor_sets();
    s.nodes = Eigen::MatrixXd(static_cast<Eigen::Index>(s.neighbors.size()), kNodeFeatureDim);
    for (Eigen::Index k = 0; k < s.nodes.size(); ++k) s.nodes.data()[k] = normal(rng);
    s.global = Eigen::VectorXd(kGlobalFeatureDim);
    for (Eigen::Index k = 0; k < s.global.size(); ++k) s.global(k) = normal(rng);
    s.baseline = Eigen::VectorXd(kBaselineFeatureDim);
    for (Eigen::Index k = 0; k < s.baseline.size(); ++k) s.baseline(k) = normal(rng);
    s.baseline(0) = s.global(0);
    s.target = 0.5 + 0.15 * s.global(0);
    out.push_back(std::move(s));
  }
  return out;
}

TEST(training, MseLoss) {
  const std::vector<double> a{0.2, 0.4}, z{0.0}, o{1.0}, x{0.0, 1.0}, y{1.0, 0.0};
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(z, o), 1.0);
  EXPECT_EQ(mse_loss(x, y), 1.0);
  EXPECT_EQ(kind_of([] { mse_loss({}, {}); }), ErrorKind::EmptyBatch);
  EXPECT_EQ(kind_of([&] { mse_loss(a, z); }), ErrorKind::ShapeMismatch);
}

TEST(training, ZeroOutputZeroTargetHasZeroGradient) {
  auto samples = linear_samples(3, 1);
  for (auto &s : samples) s.target = 0.0;
  GtModel m = init_model(ModelConfig{}, 1);
  m.params.reg3.w.setZero();
  m.params.reg3.b.setZero();
  auto r = backward(m, make_graph_batch(std::span<const FeaturizedSample>(samples)));
  EXPECT_EQ(r.loss, 0.0);
  for (const auto &v : r.grad.views()) {
    for (double g : v.data) EXPECT_EQ(g, 0.0) << v.name;
  }
}

TEST(training, GradientsMatchFiniteDifferences) {
  for (uint64_t seed = 100; seed < 103; ++seed) {
    const GradCheckInstance inst = random_grad_check_instance(seed);
    EXPECT_EQ(inst.batch.nodes.rows(), 5);
    const GradCheckResult r = grad_check(inst.model, inst.batch, 1e-4);
    EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_parameter;
    EXPECT_EQ(r.checked + r.skipped, 25169u);
    EXPECT_LT(r.skipped, r.checked / 100);
  }
}

TEST(training, RegressorGradientsMatchTightly) {
  for (uint64_t seed = 200; seed < 203; ++seed) {
    const GradCheckInstance inst = random_grad_check_instance(seed);
    const GradCheckResult r = grad_check(inst.model, inst.batch, 1e-3, {"regressor."});
    EXPECT_LT(r.max_rel_error, 1e-6) << r.worst_parameter;
    EXPECT_EQ(r.checked + r.skipped, 21377u);
  }
}

TEST(training, GradCheckWithoutGlobalFeatures) {
  GradCheckInstance inst = random_grad_check_instance(7);
  ModelConfig cfg = inst.model.config;
  cfg.use_global_features = false;
  cfg.n_layers = 3;
  inst.model = init_model(cfg, 7);
  const GradCheckResult r = grad_check(inst.model, inst.batch, 1e-4);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_parameter;
}

TEST(training, GradCheckRejectsBadStep) {
  const GradCheckInstance inst = random_grad_check_instance(1);
  EXPECT_EQ(kind_of([&] { grad_check(inst.model, inst.batch, 0.0); }), ErrorKind::InvalidStep);
  EXPECT_EQ(kind_of([&] { grad_check(inst.model, inst.batch, -1e-4); }), ErrorKind::InvalidStep);
}

TEST(training, DuplicatedBatchKeepsGradients) {
  auto samples = linear_samples(3, 2);
  const GtModel m = init_model(ModelConfig{}, 2);
  const auto once = backward(m, make_graph_batch(std::span<const FeaturizedSample>(samples)));
  std::vector<FeaturizedSample> doubled = samples;
  doubled.insert(doubled.end(), samples.begin(), samples.end());
  auto twice = backward(m, make_graph_batch(std::span<const FeaturizedSample>(doubled)));
  EXPECT_NEAR(once.loss, twice.loss, 1e-15);
  auto a = once.grad;
  auto av = a.views();
  auto bv = twice.grad.views();
  for (size_t p = 0; p < av.size(); ++p) {
    for (size_t i = 0; i < av[p].data.size(); ++i) EXPECT_NEAR(av[p].data[i], bv[p].data[i], 1e-13) << av[p].name;
  }
}

TEST(training, SimpleNnGradientsMatchFiniteDifferences) {
  auto samples = linear_samples(4, 3);
  std::vector<const FeaturizedSample *> ptrs;
  for (const auto &s : samples) ptrs.push_back(&s);
  const BaselineBatch batch = make_baseline_batch(ptrs);
  SimpleNn m = init_simple_nn(3);
  auto analytic = backward(m, batch);
  auto grads = analytic.grad.views();
  auto params = m.params.views();
  const double h = 1e-6;
  double worst = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    for (size_t i = 0; i < params[p].data.size(); i += 37) {
      const double saved = params[p].data[i];
      params[p].data[i] = saved + h;
      const Eigen::VectorXd up = simple_nn_forward(m, batch.features);
      params[p].data[i] = saved - h;
      const Eigen::VectorXd down = simple_nn_forward(m, batch.features);
      params[p].data[i] = saved;
      const double lu = (up - batch.targets).squaredNorm() / 4.0;
      const double ld = (down - batch.targets).squaredNorm() / 4.0;
      const double numeric = (lu - ld) / (2 * h);
      const double exact = grads[p].data[i];
      worst = std::max(worst, std::abs(numeric - exact) / std::max({std::abs(exact), std::abs(numeric), 1e-4}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(training, AdamStepExamples) {
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  {
    std::vector<double> p{0.3, -1.2};
    const std::vector<double> g{0.0, 0.0};
    AdamState st;
    adam_step(p, g, st, cfg, 1);
    EXPECT_EQ(p, (std::vector<double>{0.3, -1.2}));
  }
  {
    // First step: m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
    std::vector<double> p{1.0, 1.0};
    const std::vector<double> g{0.25, -3.0};
    AdamState st;
    adam_step(p, g, st, cfg, 1);
    EXPECT_NEAR(p[0], 1.0 - cfg.learning_rate * 0.25 / (0.25 + cfg.epsilon), 1e-15);
    EXPECT_NEAR(p[1], 1.0 + cfg.learning_rate * 3.0 / (3.0 + cfg.epsilon), 1e-15);
    // Second step with the same gradient: bias-corrected moments are still g.
    adam_step(p, g, st, cfg, 2);
    EXPECT_NEAR(p[0], 1.0 - 2 * cfg.learning_rate * 0.25 / (0.25 + cfg.epsilon), 1e-14);
  }
  {
    TrainConfig wd = cfg;
    wd.weight_decay = 1e-2;
    std::vector<double> p{0.8, -0.5};
    const std::vector<double> g{0.0, 0.0};
    AdamState st;
    for (size_t t = 1; t <= 3; ++t) {
      const std::vector<double> before = p;
      adam_step(p, g, st, wd, t);
      EXPECT_LT(std::abs(p[0]), std::abs(before[0]));
      EXPECT_LT(std::abs(p[1]), std::abs(before[1]));
    }
  }
  std::vector<double> p{1.0};
  const std::vector<double> g{1.0};
  AdamState st;
  EXPECT_EQ(kind_of([&] { adam_step(p, g, st, cfg, 0); }), ErrorKind::InvalidStep);
}

TEST(training, TrainConfigValidation) {
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(validate_train_config(c), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(validate_train_config(c), Error);
  c = TrainConfig{};
  c.seed = 42;
  EXPECT_EQ(train_config_from_json(train_config_to_json(c)), c);
}

TEST(training, LearnsLinearTarget) {
  const auto train_set = linear_samples(48, 10);
  const auto val_set = linear_samples(12, 11);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 5;
  const auto report = train(init_model(ModelConfig{}, 5), train_set, val_set, cfg);
  ASSERT_EQ(report.train_loss.size(), 200u);
  EXPECT_GE(report.train_loss.front() / report.train_loss.back(), 10.0);
  EXPECT_EQ(report.best_val_rmse, *std::min_element(report.val_rmse.begin(), report.val_rmse.end()));
  EXPECT_LE(report.best_val_rmse, report.val_rmse.back());
  EXPECT_GE(report.best_epoch, 1u);
}

TEST(training, SimpleNnLearnsLinearTarget) {
  const auto train_set = linear_samples(48, 12);
  const auto val_set = linear_samples(12, 13);
  TrainConfig cfg;
  cfg.epochs = 200;
  const auto report = train(init_simple_nn(6), train_set, val_set, cfg);
  EXPECT_GE(report.train_loss.front() / report.train_loss.back(), 10.0);
}

TEST(training, MiniBatchesAndDeterminism) {
  const auto train_set = linear_samples(30, 20);
  const auto val_set = linear_samples(8, 21);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 7;
  cfg.seed = 3;
  const GtModel init = init_model(ModelConfig{}, 4);
  const auto a = train(init, train_set, val_set, cfg);
  const auto b = train(init, train_set, val_set, cfg);
  EXPECT_EQ(a.train_loss, b.train_loss);
  EXPECT_EQ(a.val_rmse, b.val_rmse);
  EXPECT_EQ(checkpoint_to_json(a.best).dump(), checkpoint_to_json(b.best).dump());
  EXPECT_EQ(history_csv(a), history_csv(b));
  EXPECT_EQ(history_csv(a).substr(0, 24), "epoch,train_mse,val_rmse");
  cfg.seed = 4;
  EXPECT_NE(train(init, train_set, val_set, cfg).train_loss, a.train_loss);
}

TEST(training, EmptySplitsAreRejected) {
  const auto some = linear_samples(3, 1);
  const std::vector<FeaturizedSample> none;
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_EQ(kind_of([&] { train(init_model(ModelConfig{}, 1), none, some, cfg); }), ErrorKind::EmptySplit);
  EXPECT_EQ(kind_of([&] { train(init_model(ModelConfig{}, 1), some, none, cfg); }), ErrorKind::EmptySplit);
}

}  // namespace
}  // namespace qrel

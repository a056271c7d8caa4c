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

#include "qrel/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qrel/error.h"

namespace qrel {
namespace {

Dataset tiny_dataset(size_t circuits, uint64_t seed) {
  GenSpec spec;
  spec.n_circuits = circuits;
  spec.max_gates = 15;
  return build_dataset(spec, seed);
}

size_t line_count(const std::string &s) {
  return static_cast<size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(eval, PerfectPredictions) {
  const std::vector<double> x{0.1, 0.5, 0.3, 0.9};
  const MetricsReport r = compute_metrics(x, x);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_EQ(r.require_r2(), 1.0);
  EXPECT_NEAR(r.spearman, 1.0, 1e-15);
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.pairs.size(), 4u);
}

TEST(eval, ReversedRanksAndMeanPredictor) {
  const std::vector<double> t{0.1, 0.2, 0.3, 0.4, 0.5};
  const std::vector<double> rev{5.0, 4.0, 3.0, 2.0, 1.0};
  EXPECT_NEAR(compute_metrics(t, rev).spearman, -1.0, 1e-15);
  const std::vector<double> mean(5, 0.3);
  const MetricsReport r = compute_metrics(t, mean);
  EXPECT_NEAR(r.require_r2(), 0.0, 1e-15);
  EXPECT_NEAR(r.rmse, std::sqrt(0.02), 1e-15);
}

TEST(eval, ZeroVarianceIsFlagged) {
  const std::vector<double> t(3, 0.7), p{0.6, 0.7, 0.8};
  const MetricsReport r = compute_metrics(t, p);
  EXPECT_FALSE(r.r2_defined);
  EXPECT_TRUE(std::isnan(r.r2));
  try {
    r.require_r2();
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVariance);
  }
  EXPECT_THROW(compute_metrics({}, {}), Error);
  EXPECT_THROW(compute_metrics(t, std::vector<double>{1.0}), Error);
}

TEST(eval, AverageRanksWithTies) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0}));
  // Hand value: ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
  const std::vector<double> a{1.0, 2.0, 2.0, 3.0}, b{1.0, 2.0, 3.0, 4.0};
  const double ra[4] = {1, 2.5, 2.5, 4}, rb[4] = {1, 2, 3, 4};
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 4; ++i) {
    sab += (ra[i] - 2.5) * (rb[i] - 2.5);
    saa += (ra[i] - 2.5) * (ra[i] - 2.5);
    sbb += (rb[i] - 2.5) * (rb[i] - 2.5);
  }
  EXPECT_NEAR(spearman(a, b), sab / std::sqrt(saa * sbb), 1e-15);
}

TEST(eval, SpearmanInvariantUnderMonotoneTransforms) {
  const std::vector<double> t{0.9, 0.1, 0.5, 0.7, 0.3, 0.2};
  const std::vector<double> p{0.8, 0.3, 0.4, 0.75, 0.35, 0.1};
  std::vector<double> q;
  for (double x : p) q.push_back(std::exp(5 * x) - 3.0);
  EXPECT_NEAR(spearman(t, p), spearman(t, q), 1e-15);
}

TEST(eval, EvaluatePredictionsClampsAndEmitsScatter) {
  Eigen::VectorXd targets(3), raw(3);
  targets << 0.0, 0.5, 1.0;
  raw << -0.2, 0.5, 1.3;
  const MetricsReport r = evaluate_predictions(raw, targets);
  EXPECT_EQ(r.rmse, 0.0);
  const std::string csv = scatter_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "target,prediction");
  EXPECT_EQ(line_count(csv), 4u);
  // Stored labels scored against themselves give zero error.
  const Dataset d = tiny_dataset(4, 1);
  Eigen::VectorXd labels(static_cast<Eigen::Index>(d.samples.size()));
  for (size_t i = 0; i < d.samples.size(); ++i) labels(static_cast<Eigen::Index>(i)) = d.samples[i].pst;
  EXPECT_EQ(evaluate_predictions(labels, labels).rmse, 0.0);
}

TEST(eval, EvaluateSplitsAndErrors) {
  const Dataset d = tiny_dataset(6, 2);
  GtModel m = init_model(ModelConfig{}, 1);
  EXPECT_THROW(evaluate(m, d, Split::Test), Error);
  const auto raw = featurize_dataset(d);
  m.normalizer = fit_normalizer(split_features(d, raw, Split::Train, nullptr));
  const MetricsReport r = evaluate(m, d, Split::Test);
  EXPECT_EQ(r.n, d.indices(Split::Test).size());
  for (const auto &[t, p] : r.pairs) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  Dataset no_test = d;
  for (auto &s : no_test.split) {
    if (s == Split::Test) s = Split::Train;
  }
  try {
    evaluate(m, no_test, Split::Test);
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySplit);
  }
}

TEST(eval, FeaturizeDatasetIndependentOfWorkers) {
  const Dataset d = tiny_dataset(5, 3);
  const auto a = featurize_dataset(d, FeatureGroup::None, 1);
  const auto b = featurize_dataset(d, FeatureGroup::None, 3);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].nodes, b[i].nodes);
    EXPECT_EQ(a[i].target, d.samples[i].pst);
  }
}

TEST(eval, StandardAblationSpecs) {
  const auto specs = standard_ablation_specs();
  ASSERT_EQ(specs.size(), 14u);
  size_t global_off = 0, drops = 0, shots = 0;
  for (const auto &s : specs) {
    global_off += !s.use_global_features;
    drops += s.drop_feature_group != FeatureGroup::None;
    shots += s.shots.has_value();
  }
  EXPECT_EQ(global_off, 1u);
  EXPECT_EQ(drops, 5u);
  EXPECT_EQ(shots, 4u);
  const AblationSpec parsed = ablation_spec_from_json(
      nlohmann::json{{"drop_feature_group", "t1t2"}, {"n_layers", 3}, {"shots", 2048}, {"use_global_features", false}});
  EXPECT_EQ(parsed.drop_feature_group, FeatureGroup::T1T2);
  EXPECT_EQ(parsed.n_layers, 3u);
  EXPECT_EQ(parsed.shots, 2048u);
  EXPECT_FALSE(parsed.use_global_features);
  EXPECT_FALSE(parsed.label.empty());
}

TEST(eval, AblationRowsAreReproducible) {
  const Dataset d = tiny_dataset(8, 4);
  TrainConfig cfg;
  cfg.epochs = 5;
  AblationSpec spec{"shots=512;drop=t1t2", true, FeatureGroup::T1T2, 1, 512};
  const AblationRow a = run_ablation(d, spec, cfg, 9);
  const AblationRow b = run_ablation(d, spec, cfg, 9);
  const std::vector<AblationRow> rows{a, b};
  const std::string csv = ablation_csv(rows);
  EXPECT_EQ(line_count(csv), 3u);
  std::istringstream in(csv);
  std::string header, r1, r2;
  std::getline(in, header);
  std::getline(in, r1);
  std::getline(in, r2);
  EXPECT_EQ(r1, r2);
  EXPECT_EQ(header.substr(0, 6), "label,");
  EXPECT_TRUE(std::isfinite(a.test.rmse));
}

TEST(eval, BenchReportsPositiveLatencies) {
  const Dataset d = tiny_dataset(3, 5);
  GtModel m = init_model(ModelConfig{}, 1);
  m.normalizer = fit_normalizer(featurize_dataset(d));
  std::vector<BenchCase> cases;
  for (const auto &s : d.samples) cases.push_back({s.circuit, s.profile});
  const std::vector<size_t> sizes{1, 10};
  const BenchReport r = bench_runtime(cases, m, sizes);
  EXPECT_EQ(r.n_circuits, cases.size());
  EXPECT_GT(r.simulation_latency_s, 0.0);
  ASSERT_EQ(r.predictor_latency_s.size(), 2u);
  for (const auto &[b, t] : r.predictor_latency_s) {
    EXPECT_GT(t, 0.0);
    EXPECT_TRUE(std::isfinite(t));
  }
  EXPECT_GT(r.speedup(1), 0.0);
  EXPECT_THROW(r.speedup(3), Error);
  EXPECT_EQ(line_count(bench_csv(r)), 4u);
}

TEST(eval, CorrelationReport) {
  GenSpec spec;
  spec.max_gates = 10;
  const CorrelationReport r = correlate_pst_fidelity(spec, 6, 1);
  EXPECT_EQ(r.pst.size(), 30u);
  EXPECT_EQ(r.fidelity.size(), 30u);
  EXPECT_GT(r.spearman, 0.0);
  EXPECT_EQ(line_count(correlation_csv(r)), 31u);
}

}  // namespace
}  // namespace qrel

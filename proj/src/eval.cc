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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qrel/error.h"
#include "qrel/parallel.h"
#include "qrel/random.h"
#include "qrel/simulator.h"

namespace qrel {

double MetricsReport::require_r2() const {
  if (!r2_defined) throw Error(ErrorKind::ZeroVariance, "R^2 is undefined for constant targets");
  return r2;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "correlation inputs differ in length");
  if (a.empty()) throw Error(ErrorKind::EmptyInput, "correlation of empty inputs");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  return pearson(ra, rb);
}

MetricsReport compute_metrics(std::span<const double> targets, std::span<const double> predictions) {
  if (targets.empty()) throw Error(ErrorKind::EmptyInput, "metrics need at least one sample");
  if (targets.size() != predictions.size()) throw Error(ErrorKind::ShapeMismatch, "targets and predictions differ in length");
  MetricsReport r;
  r.n = targets.size();
  const double n = static_cast<double>(r.n);
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < r.n; ++i) {
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
    r.pairs.emplace_back(targets[i], predictions[i]);
  }
  r.rmse = std::sqrt(ss_res / n);
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  r.r2_defined = *lo != *hi;
  r.r2 = r.r2_defined ? 1.0 - ss_res / ss_tot : std::numeric_limits<double>::quiet_NaN();
  r.spearman = spearman(targets, predictions);
  return r;
}

std::string scatter_csv(const MetricsReport &r) {
  std::ostringstream out;
  out.precision(17);
  out << "target,prediction\n";
  for (const auto &[t, p] : r.pairs) out << t << ',' << p << '\n';
  return out.str();
}

std::vector<FeaturizedSample> featurize_dataset(const Dataset &d, FeatureGroup dropped, size_t workers) {
  std::vector<FeaturizedSample> out(d.samples.size());
  parallel_for(d.samples.size(), workers, [&](size_t i) {
    const Sample &s = d.samples[i];
    out[i] = featurize(s.circuit, s.profile, s.pst, dropped);
  });
  return out;
}

std::vector<FeaturizedSample> split_features(const Dataset &d, std::span<const FeaturizedSample> raw, Split split,
                                             const Normalizer *n) {
  std::vector<FeaturizedSample> out;
  for (size_t i : d.indices(split)) out.push_back(n ? normalize(raw[i], *n) : raw[i]);
  return out;
}

MetricsReport evaluate_predictions(const Eigen::VectorXd &raw_predictions, const Eigen::VectorXd &targets) {
  const Eigen::VectorXd clipped = raw_predictions.cwiseMax(0.0).cwiseMin(1.0);
  return compute_metrics({targets.data(), static_cast<size_t>(targets.size())},
                         {clipped.data(), static_cast<size_t>(clipped.size())});
}

namespace {

std::vector<FeaturizedSample> raw_split(const Dataset &d, Split split, FeatureGroup dropped) {
  std::vector<FeaturizedSample> out;
  for (size_t i : d.indices(split)) {
    const Sample &s = d.samples[i];
    out.push_back(featurize(s.circuit, s.profile, s.pst, dropped));
  }
  if (out.empty()) throw Error(ErrorKind::EmptySplit, "split '" + split_name(split) + "' has no samples");
  return out;
}

Eigen::VectorXd targets_of(std::span<const FeaturizedSample> s) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) t(static_cast<Eigen::Index>(i)) = s[i].target;
  return t;
}

}  // namespace

MetricsReport evaluate(const GtModel &m, const Dataset &d, Split split, FeatureGroup dropped) {
  const auto raw = raw_split(d, split, dropped);
  return evaluate_predictions(predict_raw(m, raw), targets_of(raw));
}

MetricsReport evaluate(const SimpleNn &m, const Dataset &d, Split split) {
  const auto raw = raw_split(d, split, FeatureGroup::None);
  return evaluate_predictions(predict_raw(m, raw), targets_of(raw));
}

ExperimentResult<GtModel> run_gt_experiment(const Dataset &d, const ModelConfig &model, const TrainConfig &train_cfg,
                                            FeatureGroup dropped, uint64_t init_seed) {
  const std::vector<FeaturizedSample> raw = featurize_dataset(d, dropped);
  const std::vector<FeaturizedSample> raw_train = split_features(d, raw, Split::Train, nullptr);
  GtModel m = init_model(model, init_seed);
  m.normalizer = fit_normalizer(raw_train);
  const auto train_set = split_features(d, raw, Split::Train, &m.normalizer);
  const auto val_set = split_features(d, raw, Split::Val, &m.normalizer);
  const auto test_set = split_features(d, raw, Split::Test, &m.normalizer);
  if (test_set.empty()) throw Error(ErrorKind::EmptySplit, "test split is empty");
  ExperimentResult<GtModel> out{train(m, train_set, val_set, train_cfg), {}};
  out.test = evaluate_predictions(forward(out.report.best, make_graph_batch(std::span<const FeaturizedSample>(test_set))),
                                  targets_of(test_set));
  return out;
}

ExperimentResult<SimpleNn> run_nn_experiment(const Dataset &d, const TrainConfig &train_cfg, uint64_t init_seed) {
  const std::vector<FeaturizedSample> raw = featurize_dataset(d);
  SimpleNn m = init_simple_nn(init_seed);
  m.normalizer = fit_normalizer(split_features(d, raw, Split::Train, nullptr));
  const auto train_set = split_features(d, raw, Split::Train, &m.normalizer);
  const auto val_set = split_features(d, raw, Split::Val, &m.normalizer);
  const auto test_set = split_features(d, raw, Split::Test, &m.normalizer);
  if (test_set.empty()) throw Error(ErrorKind::EmptySplit, "test split is empty");
  ExperimentResult<SimpleNn> out{train(m, train_set, val_set, train_cfg), {}};
  std::vector<const FeaturizedSample *> ptrs;
  for (const auto &s : test_set) ptrs.push_back(&s);
  out.test = evaluate_predictions(simple_nn_forward(out.report.best, make_baseline_batch(ptrs).features),
                                  targets_of(test_set));
  return out;
}

std::vector<AblationSpec> standard_ablation_specs() {
  std::vector<AblationSpec> out;
  out.push_back({"global_features=on", true, FeatureGroup::None, 2, std::nullopt});
  out.push_back({"global_features=off", false, FeatureGroup::None, 2, std::nullopt});
  for (FeatureGroup g : {FeatureGroup::GateError, FeatureGroup::GateIndex, FeatureGroup::GateType,
                         FeatureGroup::QubitIndex, FeatureGroup::T1T2}) {
    out.push_back({"drop=" + feature_group_name(g), true, g, 2, std::nullopt});
  }
  for (size_t layers : {1, 2, 3}) out.push_back({"layers=" + std::to_string(layers), true, FeatureGroup::None, layers, std::nullopt});
  for (uint64_t shots : {512, 1024, 2048, 4096}) {
    out.push_back({"shots=" + std::to_string(shots), true, FeatureGroup::None, 2, shots});
  }
  return out;
}

AblationSpec ablation_spec_from_json(const nlohmann::json &j) {
  AblationSpec s;
  try {
    s.use_global_features = j.value("use_global_features", true);
    s.drop_feature_group = feature_group_from_name(j.value("drop_feature_group", std::string("none")));
    s.n_layers = j.value("n_layers", size_t{2});
    if (j.contains("shots") && !j["shots"].is_null()) s.shots = j["shots"].get<uint64_t>();
    s.label = j.value("label", std::string{});
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("ablation row JSON: ") + e.what());
  }
  if (s.label.empty()) {
    s.label = "global=" + std::string(s.use_global_features ? "on" : "off") + ";drop=" +
              feature_group_name(s.drop_feature_group) + ";layers=" + std::to_string(s.n_layers) +
              (s.shots ? ";shots=" + std::to_string(*s.shots) : "");
  }
  return s;
}

AblationRow run_ablation(const Dataset &d, const AblationSpec &spec, const TrainConfig &train_cfg, uint64_t seed) {
  ModelConfig cfg;
  cfg.n_layers = spec.n_layers;
  cfg.use_global_features = spec.use_global_features;
  validate_config(cfg);
  const Dataset relabelled = spec.shots ? resample_shots(d, *spec.shots, derive_seed(seed, *spec.shots)) : d;
  TrainConfig tc = train_cfg;
  tc.seed = derive_seed(seed, 1);
  const auto result = run_gt_experiment(relabelled, cfg, tc, spec.drop_feature_group, derive_seed(seed, 2));
  return {spec, result.report.best_epoch, result.report.best_val_rmse, result.test};
}

std::string ablation_csv(std::span<const AblationRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "label,use_global_features,drop_feature_group,n_layers,shots,best_epoch,val_rmse,test_rmse,test_r2,"
         "test_spearman,n_test\n";
  for (const auto &r : rows) {
    out << r.spec.label << ',' << (r.spec.use_global_features ? 1 : 0) << ','
        << feature_group_name(r.spec.drop_feature_group) << ',' << r.spec.n_layers << ','
        << (r.spec.shots ? std::to_string(*r.spec.shots) : std::string("stored")) << ',' << r.best_epoch << ','
        << r.val_rmse << ',' << r.test.rmse << ',' << r.test.r2 << ',' << r.test.spearman << ',' << r.test.n << '\n';
  }
  return out.str();
}

double BenchReport::speedup(size_t batch_size) const {
  for (const auto &[b, t] : predictor_latency_s) {
    if (b == batch_size) return simulation_latency_s / t;
  }
  throw Error(ErrorKind::InvalidConfig, "no measurement at batch size " + std::to_string(batch_size));
}

BenchReport bench_runtime(std::span<const BenchCase> cases, const GtModel &m, std::span<const size_t> batch_sizes) {
  using Clock = std::chrono::steady_clock;
  if (cases.empty()) throw Error(ErrorKind::EmptyInput, "benchmark needs circuits");
  if (m.normalizer.empty()) throw Error(ErrorKind::NormalizerMissing, "benchmark model has no normalizer");
  BenchReport r;
  r.n_circuits = cases.size();

  double sink = 0.0;
  const auto t0 = Clock::now();
  for (const auto &c : cases) {
    const DensityMatrix rho = simulate_density(concat_with_inverse(c.circuit), c.profile, true);
    sink += all_zero_probability(rho, c.profile, true);
  }
  r.simulation_latency_s = std::chrono::duration<double>(Clock::now() - t0).count() / static_cast<double>(cases.size());

  constexpr double kMinSeconds = 0.5;
  for (size_t bsz : batch_sizes) {
    if (bsz == 0) throw Error(ErrorKind::InvalidConfig, "batch size must be positive");
    size_t done = 0;
    const auto start = Clock::now();
    double elapsed = 0.0;
    do {
      for (size_t lo = 0; lo < cases.size(); lo += bsz) {
        const size_t hi = std::min(cases.size(), lo + bsz);
        std::vector<FeaturizedSample> batch;
        batch.reserve(hi - lo);
        for (size_t i = lo; i < hi; ++i) {
          batch.push_back(normalize(featurize(cases[i].circuit, cases[i].profile, 0.0), m.normalizer));
        }
        const Eigen::VectorXd y = forward(m, make_graph_batch(std::span<const FeaturizedSample>(batch)));
        sink += y.cwiseMax(0.0).cwiseMin(1.0).sum();
      }
      done += cases.size();
      elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    } while (elapsed < kMinSeconds);
    r.predictor_latency_s.emplace_back(bsz, elapsed / static_cast<double>(done));
  }
  if (!std::isfinite(sink)) throw Error(ErrorKind::NonFiniteActivation, "benchmark produced non-finite values");
  return r;
}

std::string bench_csv(const BenchReport &r) {
  std::ostringstream out;
  out.precision(6);
  out << "path,batch_size,latency_s,speedup\n";
  out << "simulation,1," << r.simulation_latency_s << ",1\n";
  for (const auto &[b, t] : r.predictor_latency_s) out << "predictor," << b << ',' << t << ',' << r.simulation_latency_s / t << '\n';
  return out.str();
}

CorrelationReport correlate_pst_fidelity(const GenSpec &spec, size_t n_circuits, uint64_t seed, size_t workers) {
  GenSpec s = spec;
  s.n_circuits = n_circuits;
  s.shots = kExactShots;
  s.with_fidelity = true;
  const Dataset d = build_dataset(s, seed, workers);
  CorrelationReport r;
  for (const Sample &sample : d.samples) {
    r.pst.push_back(sample.pst_exact);
    r.fidelity.push_back(*sample.fidelity);
  }
  r.spearman = spearman(r.pst, r.fidelity);
  return r;
}

std::string correlation_csv(const CorrelationReport &r) {
  std::ostringstream out;
  out.precision(17);
  out << "pst,fidelity\n";
  for (size_t i = 0; i < r.pst.size(); ++i) out << r.pst[i] << ',' << r.fidelity[i] << '\n';
  return out.str();
}

}  // namespace qrel

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

// Command-line front end: dataset generation, training, prediction,
// evaluation, ablations, benchmarks and diagnostics.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrel/circuit.h"
#include "qrel/dataset.h"
#include "qrel/error.h"
#include "qrel/eval.h"
#include "qrel/featurizer.h"
#include "qrel/model.h"
#include "qrel/noise_model.h"
#include "qrel/parallel.h"
#include "qrel/random.h"
#include "qrel/training.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char *kVersion = "0.1.0";

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3, kNumeric = 4 };

int exit_code_for(qrel::ErrorKind kind) {
  switch (kind) {
    case qrel::ErrorKind::IoError: return kIo;
    case qrel::ErrorKind::NonFiniteActivation:
    case qrel::ErrorKind::ZeroVariance: return kNumeric;
    default: return kValidation;
  }
}

std::string one_line(std::string s) {
  for (char &c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void report_error(int code, std::string_view kind, const std::string &message) {
  std::cerr << json{{"error", kind}, {"exit_code", code}, {"message", one_line(message)}}.dump() << '\n';
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw qrel::Error(qrel::ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw qrel::Error(qrel::ErrorKind::IoError, "failed writing " + path.string());
}

void require_file(const std::string &path) {
  if (!fs::is_regular_file(path)) throw qrel::Error(qrel::ErrorKind::IoError, "no such file: " + path);
}

/// Writes `<primary>.manifest.json` next to the primary output.
void write_manifest(const fs::path &primary, const std::string &subcommand, const json &config,
                    const std::vector<std::string> &outputs) {
  json m;
  m["tool"] = "qrel";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["outputs"] = outputs;
  m["build"] = {{"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  qrel::save_json(m, fs::path(primary.string() + ".manifest.json"));
}

json metrics_json(const qrel::MetricsReport &r) {
  return {{"n", r.n}, {"rmse", r.rmse}, {"r2", r.r2_defined ? json(r.r2) : json(nullptr)}, {"spearman", r.spearman}};
}

std::string metrics_csv(const std::string &split, const qrel::MetricsReport &r) {
  std::ostringstream out;
  out.precision(17);
  out << "split,n,rmse,r2,spearman\n" << split << ',' << r.n << ',' << r.rmse << ',' << r.r2 << ',' << r.spearman << '\n';
  return out.str();
}

struct Common {
  size_t workers = qrel::default_workers();
};

// ---------------------------------------------------------------- gen-dataset

struct GenArgs {
  std::string spec_path;
  uint64_t seed = 1;
  std::string out;
  std::optional<size_t> n_circuits;
  std::optional<uint64_t> shots;
};

int run_gen(const GenArgs &a, const Common &c) {
  qrel::GenSpec spec;
  if (!a.spec_path.empty()) {
    require_file(a.spec_path);
    spec = qrel::spec_from_json(qrel::load_json(a.spec_path));
  }
  if (a.n_circuits) spec.n_circuits = *a.n_circuits;
  if (a.shots) spec.shots = *a.shots;
  const qrel::Dataset d = qrel::build_dataset(spec, a.seed, c.workers);
  qrel::write_jsonl(d, a.out);
  write_manifest(a.out, "gen-dataset", {{"spec", qrel::spec_to_json(spec)}, {"seed", a.seed}}, {a.out});
  std::cout << json{{"samples", d.samples.size()}, {"out", a.out}}.dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config_path;
  std::string history;
  std::string kind = "graph_transformer";
  uint64_t seed = 1;
  std::optional<size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<size_t> layers;
  bool no_global = false;
  std::string drop = "none";
};

int run_train(const TrainArgs &a, const Common &c) {
  require_file(a.data);
  const qrel::Dataset d = qrel::read_jsonl(a.data);
  qrel::TrainConfig tc;
  qrel::ModelConfig mc;
  if (!a.config_path.empty()) {
    require_file(a.config_path);
    const json j = qrel::load_json(a.config_path);
    if (j.contains("train")) tc = qrel::train_config_from_json(j["train"]);
    if (j.contains("model")) mc = qrel::config_from_json(j["model"]);
  }
  tc.seed = qrel::derive_seed(a.seed, 1);
  if (a.epochs) tc.epochs = *a.epochs;
  if (a.learning_rate) tc.learning_rate = *a.learning_rate;
  if (a.layers) mc.n_layers = *a.layers;
  if (a.no_global) mc.use_global_features = false;
  qrel::validate_train_config(tc);
  qrel::validate_config(mc);
  const qrel::FeatureGroup drop = qrel::feature_group_from_name(a.drop);
  const uint64_t init_seed = qrel::derive_seed(a.seed, 2);

  json result;
  std::string history;
  if (a.kind == "graph_transformer") {
    auto r = qrel::run_gt_experiment(d, mc, tc, drop, init_seed);
    qrel::save_json(qrel::checkpoint_to_json(r.report.best), a.out);
    history = qrel::history_csv(r.report);
    result = {{"best_epoch", r.report.best_epoch}, {"val_rmse", r.report.best_val_rmse}, {"test", metrics_json(r.test)}};
  } else if (a.kind == "simple_nn") {
    if (drop != qrel::FeatureGroup::None) throw qrel::Error(qrel::ErrorKind::InvalidConfig, "--drop applies to graph_transformer only");
    auto r = qrel::run_nn_experiment(d, tc, init_seed);
    qrel::save_json(qrel::checkpoint_to_json(r.report.best), a.out);
    history = qrel::history_csv(r.report);
    result = {{"best_epoch", r.report.best_epoch}, {"val_rmse", r.report.best_val_rmse}, {"test", metrics_json(r.test)}};
  } else {
    throw qrel::Error(qrel::ErrorKind::InvalidConfig, "unknown model kind '" + a.kind + "'");
  }
  std::vector<std::string> outputs{a.out};
  if (!a.history.empty()) {
    write_text(a.history, history);
    outputs.push_back(a.history);
  }
  write_manifest(a.out, "train",
                 {{"data", a.data}, {"kind", a.kind}, {"seed", a.seed}, {"model", qrel::config_to_json(mc)},
                  {"train", qrel::train_config_to_json(tc)}, {"drop_feature_group", a.drop}, {"workers", c.workers}},
                 outputs);
  std::cout << result.dump() << '\n';
  return kOk;
}

// -------------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string circuit;
  std::string profile;
};

int run_predict(const PredictArgs &a) {
  for (const auto &p : {a.model, a.circuit, a.profile}) require_file(p);
  const json ckpt = qrel::load_json(a.model);
  const qrel::Circuit circuit = qrel::circuit_from_json(qrel::load_json(a.circuit));
  const qrel::NoiseProfile profile = qrel::profile_from_json(qrel::load_json(a.profile));
  double pst = 0.0;
  if (qrel::checkpoint_kind(ckpt) == "simple_nn") {
    const qrel::SimpleNn m = qrel::nn_from_checkpoint(ckpt);
    const qrel::FeaturizedSample raw = qrel::featurize(circuit, profile, 0.0);
    pst = std::clamp(qrel::predict_raw(m, std::span<const qrel::FeaturizedSample>(&raw, 1))(0), 0.0, 1.0);
  } else {
    pst = qrel::predict_pst(qrel::gt_from_checkpoint(ckpt), circuit, profile);
  }
  std::printf("%.17g\n", pst);
  return kOk;
}

// ----------------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "test";
  std::string out;
  std::string scatter;
};

int run_eval(const EvalArgs &a) {
  require_file(a.model);
  require_file(a.data);
  const json ckpt = qrel::load_json(a.model);
  const qrel::Dataset d = qrel::read_jsonl(a.data);
  const qrel::Split split = qrel::split_from_name(a.split);
  const qrel::MetricsReport r = qrel::checkpoint_kind(ckpt) == "simple_nn"
                                    ? qrel::evaluate(qrel::nn_from_checkpoint(ckpt), d, split)
                                    : qrel::evaluate(qrel::gt_from_checkpoint(ckpt), d, split);
  std::vector<std::string> outputs{a.out};
  write_text(a.out, metrics_csv(a.split, r));
  if (!a.scatter.empty()) {
    write_text(a.scatter, qrel::scatter_csv(r));
    outputs.push_back(a.scatter);
  }
  write_manifest(a.out, "eval", {{"model", a.model}, {"data", a.data}, {"split", a.split}}, outputs);
  std::cout << metrics_json(r).dump() << '\n';
  return kOk;
}

// --------------------------------------------------------------------- ablate

struct AblateArgs {
  std::string spec;
  std::string out;
  std::string data;
};

// Ablation config: {"data": path | "dataset": GenSpec, "dataset_seed", "seed",
// "train": TrainConfig, "rows": [AblationSpec...] (default: standard sweep),
// "out": csv path}.
int run_ablate(const AblateArgs &a, const Common &c) {
  require_file(a.spec);
  const json j = qrel::load_json(a.spec);
  std::string data = a.data.empty() ? j.value("data", std::string{}) : a.data;
  std::string out = a.out.empty() ? j.value("out", std::string{}) : a.out;
  if (out.empty()) throw qrel::Error(qrel::ErrorKind::InvalidConfig, "no output path: pass --out or set \"out\"");
  const uint64_t seed = j.value("seed", uint64_t{1});
  qrel::Dataset d;
  if (!data.empty()) {
    require_file(data);
    d = qrel::read_jsonl(data);
  } else {
    const qrel::GenSpec gs = j.contains("dataset") ? qrel::spec_from_json(j["dataset"]) : qrel::GenSpec{};
    d = qrel::build_dataset(gs, j.value("dataset_seed", uint64_t{1}), c.workers);
  }
  const qrel::TrainConfig tc = j.contains("train") ? qrel::train_config_from_json(j["train"]) : qrel::TrainConfig{};
  std::vector<qrel::AblationSpec> specs;
  if (j.contains("rows")) {
    for (const auto &row : j["rows"]) specs.push_back(qrel::ablation_spec_from_json(row));
  } else {
    specs = qrel::standard_ablation_specs();
  }
  std::vector<qrel::AblationRow> rows;
  for (const auto &s : specs) {
    rows.push_back(qrel::run_ablation(d, s, tc, seed));
    std::cerr << "ablation " << s.label << " test_rmse=" << rows.back().test.rmse << '\n';
  }
  write_text(out, qrel::ablation_csv(rows));
  write_manifest(out, "ablate", {{"spec", j}, {"data", data}}, {out});
  std::cout << json{{"rows", rows.size()}, {"out", out}}.dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------- bench

struct BenchArgs {
  std::string data;
  std::string model;
  std::string out;
  size_t n = 100;
};

int run_bench(const BenchArgs &a) {
  require_file(a.data);
  require_file(a.model);
  const qrel::Dataset d = qrel::read_jsonl(a.data);
  const qrel::GtModel m = qrel::gt_from_checkpoint(qrel::load_json(a.model));
  std::vector<qrel::BenchCase> cases;
  for (size_t i = 0; i < d.samples.size() && cases.size() < a.n; ++i) {
    cases.push_back({d.samples[i].circuit, d.samples[i].profile});
  }
  if (cases.size() < 100) {
    throw qrel::Error(qrel::ErrorKind::InvalidConfig, "benchmark needs at least 100 circuits, got " +
                                                          std::to_string(cases.size()));
  }
  const std::vector<size_t> sizes{1, 10};
  const qrel::BenchReport r = qrel::bench_runtime(cases, m, sizes);
  const std::string csv = qrel::bench_csv(r);
  if (!a.out.empty()) {
    write_text(a.out, csv);
    write_manifest(a.out, "bench", {{"data", a.data}, {"model", a.model}, {"n", cases.size()}}, {a.out});
  }
  std::cout << csv;
  return kOk;
}

// ----------------------------------------------------------------- grad-check

struct GradArgs {
  uint64_t seed = 1;
  size_t instances = 10;
  double step = 1e-4;
  double tolerance = 1e-4;
};

int run_grad_check(const GradArgs &a) {
  double worst = 0.0;
  std::string worst_name;
  for (size_t i = 0; i < a.instances; ++i) {
    const qrel::GradCheckInstance inst = qrel::random_grad_check_instance(qrel::derive_seed(a.seed, i));
    const qrel::GradCheckResult r = qrel::grad_check(inst.model, inst.batch, a.step);
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = r.worst_parameter;
    }
  }
  const bool ok = worst < a.tolerance;
  std::cout << json{{"instances", a.instances}, {"max_rel_error", worst}, {"worst_parameter", worst_name}, {"pass", ok}}.dump()
            << '\n';
  if (!ok) {
    report_error(kNumeric, "GradientMismatch", "max relative error " + std::to_string(worst) + " in " + worst_name);
    return kNumeric;
  }
  return kOk;
}

// ------------------------------------------------------------------ correlate

struct CorrelateArgs {
  std::string spec_path;
  size_t n = 200;
  uint64_t seed = 1;
  std::string out;
};

int run_correlate(const CorrelateArgs &a, const Common &c) {
  qrel::GenSpec spec;
  if (!a.spec_path.empty()) {
    require_file(a.spec_path);
    spec = qrel::spec_from_json(qrel::load_json(a.spec_path));
  }
  const qrel::CorrelationReport r = qrel::correlate_pst_fidelity(spec, a.n, a.seed, c.workers);
  if (!a.out.empty()) {
    write_text(a.out, qrel::correlation_csv(r));
    write_manifest(a.out, "correlate", {{"spec", qrel::spec_to_json(spec)}, {"n", a.n}, {"seed", a.seed}}, {a.out});
  }
  std::cout << json{{"circuits", a.n}, {"samples", r.pst.size()}, {"spearman", r.spearman}}.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Reliability estimation for noisy quantum circuits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  app.add_option("--workers", common.workers, "Worker threads for dataset and featurization")
      ->check(CLI::PositiveNumber);

  GenArgs gen;
  auto *gen_cmd = app.add_subcommand("gen-dataset", "Generate a labelled JSONL dataset");
  gen_cmd->add_option("--spec", gen.spec_path, "Generation spec JSON");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--out", gen.out, "Output JSONL")->required();
  gen_cmd->add_option("--n-circuits", gen.n_circuits, "Override the circuit count");
  gen_cmd->add_option("--shots", gen.shots, "Override the shot count (0 = exact)");

  TrainArgs tr;
  auto *train_cmd = app.add_subcommand("train", "Train a model and write its checkpoint");
  train_cmd->add_option("--data", tr.data, "Dataset JSONL")->required();
  train_cmd->add_option("--out", tr.out, "Checkpoint JSON")->required();
  train_cmd->add_option("--config", tr.config_path, "JSON with optional \"model\" and \"train\" objects");
  train_cmd->add_option("--history", tr.history, "Per-epoch history CSV");
  train_cmd->add_option("--model-kind", tr.kind, "graph_transformer or simple_nn")
      ->check(CLI::IsMember({"graph_transformer", "simple_nn"}));
  train_cmd->add_option("--seed", tr.seed, "Training seed");
  train_cmd->add_option("--epochs", tr.epochs, "Override the epoch count");
  train_cmd->add_option("--lr", tr.learning_rate, "Override the learning rate");
  train_cmd->add_option("--layers", tr.layers, "Attention layers (1-3)");
  train_cmd->add_flag("--no-global", tr.no_global, "Disable global features");
  train_cmd->add_option("--drop", tr.drop, "Node-feature group to zero");

  PredictArgs pr;
  auto *predict_cmd = app.add_subcommand("predict", "Predict the PST of one circuit");
  predict_cmd->add_option("--model", pr.model, "Checkpoint JSON")->required();
  predict_cmd->add_option("--circuit", pr.circuit, "Circuit JSON")->required();
  predict_cmd->add_option("--profile", pr.profile, "Noise profile JSON")->required();

  EvalArgs ev;
  auto *eval_cmd = app.add_subcommand("eval", "Score a checkpoint on one split");
  eval_cmd->add_option("--model", ev.model, "Checkpoint JSON")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset JSONL")->required();
  eval_cmd->add_option("--split", ev.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--out", ev.out, "Metrics CSV")->required();
  eval_cmd->add_option("--scatter", ev.scatter, "Target/prediction CSV");

  AblateArgs ab;
  auto *ablate_cmd = app.add_subcommand("ablate", "Run an ablation sweep");
  ablate_cmd->add_option("--spec", ab.spec, "Ablation JSON")->required();
  ablate_cmd->add_option("--out", ab.out, "Output CSV (overrides the spec)");
  ablate_cmd->add_option("--data", ab.data, "Dataset JSONL (overrides the spec)");

  BenchArgs be;
  auto *bench_cmd = app.add_subcommand("bench", "Compare simulation and predictor latency");
  bench_cmd->add_option("--data", be.data, "Dataset JSONL supplying circuits")->required();
  bench_cmd->add_option("--model", be.model, "Graph-transformer checkpoint")->required();
  bench_cmd->add_option("--out", be.out, "Latency CSV");
  bench_cmd->add_option("--n", be.n, "Circuits to time");

  GradArgs gc;
  auto *grad_cmd = app.add_subcommand("grad-check", "Compare analytic and numeric gradients");
  grad_cmd->add_option("--seed", gc.seed, "Instance seed");
  grad_cmd->add_option("--instances", gc.instances, "Random instances")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--step", gc.step, "Finite-difference step");
  grad_cmd->add_option("--tolerance", gc.tolerance, "Maximum relative error");

  CorrelateArgs co;
  auto *corr_cmd = app.add_subcommand("correlate", "PST versus state fidelity on random circuits");
  corr_cmd->add_option("--spec", co.spec_path, "Generation spec JSON");
  corr_cmd->add_option("--n", co.n, "Random circuits")->check(CLI::PositiveNumber);
  corr_cmd->add_option("--seed", co.seed, "Master seed");
  corr_cmd->add_option("--out", co.out, "PST/fidelity CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << app.help();
    report_error(kUsage, "BadArgs", e.what());
    return kUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen, common);
    if (*train_cmd) return run_train(tr, common);
    if (*predict_cmd) return run_predict(pr);
    if (*eval_cmd) return run_eval(ev);
    if (*ablate_cmd) return run_ablate(ab, common);
    if (*bench_cmd) return run_bench(be);
    if (*grad_cmd) return run_grad_check(gc);
    if (*corr_cmd) return run_correlate(co, common);
  } catch (const qrel::Error &e) {
    const int code = exit_code_for(e.kind());
    report_error(code, qrel::error_kind_name(e.kind()), e.what());
    return code;
  } catch (const std::exception &e) {
    report_error(kIo, "IoError", e.what());
    return kIo;
  }
  return kUsage;
}

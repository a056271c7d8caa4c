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

#include "qrel/model.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qrel/error.h"
#include "qrel/random.h"

namespace qrel {

void validate_config(const ModelConfig &c) {
  auto fail = [](const std::string &what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (c.n_layers < 1 || c.n_layers > 3) fail("n_layers must be 1, 2 or 3");
  if (c.feature_dim != kNodeFeatureDim) fail("feature_dim must be " + std::to_string(kNodeFeatureDim));
  if (c.global_dim != kGlobalFeatureDim) fail("global_dim must be " + std::to_string(kGlobalFeatureDim));
  if (c.global_hidden < 1 || c.regressor_hidden < 1) fail("hidden sizes must be positive");
  if (!(c.layer_norm_eps > 0)) fail("layer_norm_eps must be positive");
}

nlohmann::json config_to_json(const ModelConfig &c) {
  return {{"n_layers", c.n_layers},
          {"feature_dim", c.feature_dim},
          {"qkv_dim", c.feature_dim},
          {"heads", 1},
          {"global_dim", c.global_dim},
          {"global_hidden", c.global_hidden},
          {"regressor_hidden", c.regressor_hidden},
          {"use_global_features", c.use_global_features},
          {"layer_norm_eps", c.layer_norm_eps},
          {"activation", "relu"}};
}

ModelConfig config_from_json(const nlohmann::json &j) {
  ModelConfig c;
  try {
    c.n_layers = j.value("n_layers", c.n_layers);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.global_dim = j.value("global_dim", c.global_dim);
    c.global_hidden = j.value("global_hidden", c.global_hidden);
    c.regressor_hidden = j.value("regressor_hidden", c.regressor_hidden);
    c.use_global_features = j.value("use_global_features", c.use_global_features);
    c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("model config JSON: ") + e.what());
  }
  validate_config(c);
  return c;
}

namespace {

std::span<double> span_of(Eigen::MatrixXd &m) { return {m.data(), static_cast<size_t>(m.size())}; }
std::span<double> span_of(Eigen::VectorXd &v) { return {v.data(), static_cast<size_t>(v.size())}; }

void add_dense(std::vector<ParamView> &out, const std::string &prefix, Dense &d) {
  if (d.w.size() == 0) return;
  out.push_back({prefix + ".weight", span_of(d.w), {static_cast<size_t>(d.w.rows()), static_cast<size_t>(d.w.cols())}});
  out.push_back({prefix + ".bias", span_of(d.b), {static_cast<size_t>(d.b.size())}});
}

Dense zeros_like(const Dense &d) {
  return {Eigen::MatrixXd::Zero(d.w.rows(), d.w.cols()), Eigen::VectorXd::Zero(d.b.size())};
}

size_t count(std::vector<ParamView> views) {
  size_t n = 0;
  for (const auto &v : views) n += v.data.size();
  return n;
}

Dense init_dense(size_t in, size_t out, Rng &rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(in));
  Dense d{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
  // Row-major draw order so the layout in memory does not matter.
  for (Eigen::Index r = 0; r < d.w.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.w.cols(); ++c) d.w(r, c) = uniform(rng, -bound, bound);
  }
  return d;
}

Eigen::MatrixXd init_square(size_t dim, Rng &rng) { return init_dense(dim, dim, rng).w; }

}  // namespace

std::vector<ParamView> GtParams::views() {
  std::vector<ParamView> out;
  for (size_t l = 0; l < layers.size(); ++l) {
    AttentionParams &a = layers[l];
    const std::string p = "attn." + std::to_string(l);
    const size_t d = static_cast<size_t>(a.w_q.rows());
    out.push_back({p + ".w_q", span_of(a.w_q), {d, d}});
    out.push_back({p + ".w_k", span_of(a.w_k), {d, d}});
    out.push_back({p + ".w_v", span_of(a.w_v), {d, d}});
    out.push_back({p + ".ln_gain", span_of(a.ln_gain), {d}});
    out.push_back({p + ".ln_bias", span_of(a.ln_bias), {d}});
  }
  add_dense(out, "global.0", global1);
  add_dense(out, "global.1", global2);
  add_dense(out, "regressor.0", reg1);
  add_dense(out, "regressor.1", reg2);
  add_dense(out, "regressor.2", reg3);
  return out;
}

size_t GtParams::parameter_count() { return count(views()); }

GtParams GtParams::zeros_like() const {
  GtParams g;
  for (const auto &a : layers) {
    const auto d = a.w_q.rows();
    g.layers.push_back({Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                        Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)});
  }
  g.global1 = qrel::zeros_like(global1);
  g.global2 = qrel::zeros_like(global2);
  g.reg1 = qrel::zeros_like(reg1);
  g.reg2 = qrel::zeros_like(reg2);
  g.reg3 = qrel::zeros_like(reg3);
  return g;
}

std::vector<ParamView> NnParams::views() {
  std::vector<ParamView> out;
  add_dense(out, "fc.0", fc1);
  add_dense(out, "fc.1", fc2);
  add_dense(out, "fc.2", fc3);
  return out;
}

size_t NnParams::parameter_count() { return count(views()); }

NnParams NnParams::zeros_like() const {
  return {qrel::zeros_like(fc1), qrel::zeros_like(fc2), qrel::zeros_like(fc3)};
}

GtModel init_model(const ModelConfig &config, uint64_t seed) {
  validate_config(config);
  Rng rng(mix_seed(seed));
  GtModel m;
  m.config = config;
  const size_t d = config.feature_dim;
  for (size_t l = 0; l < config.n_layers; ++l) {
    AttentionParams a;
    a.w_q = init_square(d, rng);
    a.w_k = init_square(d, rng);
    a.w_v = init_square(d, rng);
    a.ln_gain = Eigen::VectorXd::Ones(d);
    a.ln_bias = Eigen::VectorXd::Zero(d);
    m.params.layers.push_back(std::move(a));
  }
  if (config.use_global_features) {
    m.params.global1 = init_dense(config.global_dim, config.global_hidden, rng);
    m.params.global2 = init_dense(config.global_hidden, config.global_hidden, rng);
  }
  m.params.reg1 = init_dense(config.regressor_input(), config.regressor_hidden, rng);
  m.params.reg2 = init_dense(config.regressor_hidden, config.regressor_hidden, rng);
  m.params.reg3 = init_dense(config.regressor_hidden, 1, rng);
  return m;
}

SimpleNn init_simple_nn(uint64_t seed, size_t hidden) {
  if (hidden < 1) throw Error(ErrorKind::InvalidConfig, "hidden size must be positive");
  Rng rng(mix_seed(seed));
  SimpleNn m;
  m.hidden = hidden;
  m.params.fc1 = init_dense(kBaselineFeatureDim, hidden, rng);
  m.params.fc2 = init_dense(hidden, hidden, rng);
  m.params.fc3 = init_dense(hidden, 1, rng);
  return m;
}

void NeighborSets::append(const std::vector<std::vector<uint32_t>> &lists, uint32_t base) {
  for (const auto &l : lists) {
    for (uint32_t j : l) index.push_back(base + j);
    offsets.push_back(static_cast<uint32_t>(index.size()));
  }
}

NeighborSets NeighborSets::from_lists(const std::vector<std::vector<uint32_t>> &lists) {
  NeighborSets nb;
  nb.append(lists, 0);
  return nb;
}

GraphBatch make_graph_batch(std::span<const FeaturizedSample *const> samples) {
  GraphBatch b;
  Eigen::Index total = 0;
  for (const auto *s : samples) total += s->nodes.rows();
  b.nodes.resize(total, kNodeFeatureDim);
  b.global.resize(static_cast<Eigen::Index>(samples.size()), kGlobalFeatureDim);
  b.targets.resize(static_cast<Eigen::Index>(samples.size()));
  Eigen::Index at = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const FeaturizedSample &s = *samples[i];
    if (s.nodes.cols() != static_cast<Eigen::Index>(kNodeFeatureDim) ||
        s.neighbors.size() != static_cast<size_t>(s.nodes.rows()) ||
        s.global.size() != static_cast<Eigen::Index>(kGlobalFeatureDim)) {
      throw Error(ErrorKind::ShapeMismatch, "sample " + std::to_string(i) + " has inconsistent feature shapes");
    }
    b.nodes.middleRows(at, s.nodes.rows()) = s.nodes;
    b.neighbors.append(s.neighbors, static_cast<uint32_t>(at));
    at += s.nodes.rows();
    b.graph_offsets.push_back(static_cast<uint32_t>(at));
    b.global.row(static_cast<Eigen::Index>(i)) = s.global.transpose();
    b.targets(static_cast<Eigen::Index>(i)) = s.target;
  }
  return b;
}

GraphBatch make_graph_batch(std::span<const FeaturizedSample> samples) {
  std::vector<const FeaturizedSample *> ptrs;
  ptrs.reserve(samples.size());
  for (const auto &s : samples) ptrs.push_back(&s);
  return make_graph_batch(std::span<const FeaturizedSample *const>(ptrs));
}

void attention_forward(const RowMatrix &h, const NeighborSets &nb, const AttentionParams &p, double eps,
                       AttentionCache &cache) {
  const Eigen::Index n = h.rows();
  const Eigen::Index d = h.cols();
  if (static_cast<size_t>(n) != nb.size() || p.w_q.rows() != d || p.w_q.cols() != d) {
    throw Error(ErrorKind::ShapeMismatch, "attention input does not match neighbor sets or weights");
  }
  cache.input = h;
  cache.q.noalias() = h * p.w_q.transpose();
  cache.k.noalias() = h * p.w_k.transpose();
  cache.v.noalias() = h * p.w_v.transpose();
  cache.probs.assign(nb.index.size(), 0.0);
  cache.attended.setZero(n, d);

  std::vector<double> scores;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto neighbors = nb.of(static_cast<size_t>(i));
    const double scale = 1.0 / std::sqrt(static_cast<double>(neighbors.size()));
    scores.resize(neighbors.size());
    double top = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < neighbors.size(); ++k) {
      scores[k] = cache.q.row(i).dot(cache.k.row(neighbors[k])) * scale;
      top = std::max(top, scores[k]);
    }
    double z = 0.0;
    for (double &s : scores) {
      s = std::exp(s - top);
      z += s;
    }
    double *prob = cache.probs.data() + nb.offsets[static_cast<size_t>(i)];
    for (size_t k = 0; k < neighbors.size(); ++k) {
      prob[k] = scores[k] / z;
      cache.attended.row(i) += prob[k] * cache.v.row(neighbors[k]);
    }
  }

  const RowMatrix residual = h + cache.attended;
  cache.xhat.resize(n, d);
  cache.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = residual.row(i).mean();
    const double var = (residual.row(i).array() - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std(i) = inv;
    cache.xhat.row(i) = (residual.row(i).array() - mean) * inv;
  }
  cache.output = (cache.xhat.array().rowwise() * p.ln_gain.transpose().array()).rowwise() +
                 p.ln_bias.transpose().array();
}

void dense_forward(const Dense &d, const Eigen::MatrixXd &x, bool relu, DenseCache &cache) {
  if (x.cols() != d.w.cols()) throw Error(ErrorKind::ShapeMismatch, "dense layer input width mismatch");
  cache.input = x;
  cache.pre.noalias() = x * d.w.transpose();
  cache.pre.rowwise() += d.b.transpose();
  cache.out = relu ? Eigen::MatrixXd(cache.pre.cwiseMax(0.0)) : cache.pre;
}

Eigen::VectorXd forward(const GtModel &m, const GraphBatch &batch, GtForwardCache *cache) {
  GtForwardCache local;
  GtForwardCache &c = cache ? *cache : local;
  const ModelConfig &cfg = m.config;
  if (batch.nodes.cols() != static_cast<Eigen::Index>(cfg.feature_dim)) {
    throw Error(ErrorKind::ShapeMismatch, "node features must have " + std::to_string(cfg.feature_dim) + " columns");
  }
  if (m.params.layers.size() != cfg.n_layers) throw Error(ErrorKind::ShapeMismatch, "layer count mismatch");

  c.layers.resize(cfg.n_layers);
  const RowMatrix *h = &batch.nodes;
  for (size_t l = 0; l < cfg.n_layers; ++l) {
    attention_forward(*h, batch.neighbors, m.params.layers[l], cfg.layer_norm_eps, c.layers[l]);
    h = &c.layers[l].output;
  }

  const auto b = static_cast<Eigen::Index>(batch.size());
  c.pooled.resize(b, static_cast<Eigen::Index>(cfg.feature_dim));
  for (Eigen::Index g = 0; g < b; ++g) {
    const auto lo = batch.graph_offsets[g];
    const auto hi = batch.graph_offsets[g + 1];
    c.pooled.row(g) = h->middleRows(lo, hi - lo).colwise().mean();
  }

  Eigen::MatrixXd reg_in;
  if (cfg.use_global_features) {
    if (batch.global.rows() != b || batch.global.cols() != static_cast<Eigen::Index>(cfg.global_dim)) {
      throw Error(ErrorKind::ShapeMismatch, "global features must be B x " + std::to_string(cfg.global_dim));
    }
    dense_forward(m.params.global1, batch.global, true, c.global1);
    dense_forward(m.params.global2, c.global1.out, false, c.global2);
    reg_in.resize(b, static_cast<Eigen::Index>(cfg.regressor_input()));
    reg_in << c.pooled, c.global2.out;
  } else {
    reg_in = c.pooled;
  }
  dense_forward(m.params.reg1, reg_in, true, c.reg1);
  dense_forward(m.params.reg2, c.reg1.out, true, c.reg2);
  dense_forward(m.params.reg3, c.reg2.out, false, c.reg3);
  c.predictions = c.reg3.out.col(0);
  return c.predictions;
}

Eigen::VectorXd simple_nn_forward(const SimpleNn &m, const Eigen::MatrixXd &x, NnForwardCache *cache) {
  if (x.cols() != static_cast<Eigen::Index>(kBaselineFeatureDim)) {
    throw Error(ErrorKind::ShapeMismatch, "baseline input must have " + std::to_string(kBaselineFeatureDim) + " columns");
  }
  NnForwardCache local;
  NnForwardCache &c = cache ? *cache : local;
  dense_forward(m.params.fc1, x, true, c.fc1);
  dense_forward(m.params.fc2, c.fc1.out, true, c.fc2);
  dense_forward(m.params.fc3, c.fc2.out, false, c.fc3);
  return c.fc3.out.col(0);
}

Eigen::VectorXd predict_raw(const GtModel &m, std::span<const FeaturizedSample> raw) {
  if (m.normalizer.empty()) throw Error(ErrorKind::NormalizerMissing, "model has no normalizer statistics");
  std::vector<FeaturizedSample> norm;
  norm.reserve(raw.size());
  for (const auto &s : raw) norm.push_back(normalize(s, m.normalizer));
  return forward(m, make_graph_batch(std::span<const FeaturizedSample>(norm)));
}

Eigen::VectorXd predict_raw(const SimpleNn &m, std::span<const FeaturizedSample> raw) {
  if (m.normalizer.empty()) throw Error(ErrorKind::NormalizerMissing, "model has no normalizer statistics");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(raw.size()), kBaselineFeatureDim);
  for (size_t i = 0; i < raw.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = m.normalizer.baseline.transform(raw[i].baseline).transpose();
  }
  return simple_nn_forward(m, x);
}

double predict_pst(const GtModel &m, const Circuit &c, const NoiseProfile &p) {
  const FeaturizedSample s = featurize(c, p, 0.0);
  const Eigen::VectorXd y = predict_raw(m, std::span<const FeaturizedSample>(&s, 1));
  return std::clamp(y(0), 0.0, 1.0);
}

namespace {

nlohmann::json params_to_json(std::vector<ParamView> views) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto &v : views) {
    out[v.name] = {{"shape", v.shape}, {"data", std::vector<double>(v.data.begin(), v.data.end())}};
  }
  return out;
}

void params_from_json(std::vector<ParamView> views, const nlohmann::json &j) {
  for (auto &v : views) {
    if (!j.contains(v.name)) throw Error(ErrorKind::ShapeMismatch, "checkpoint lacks parameter " + v.name);
    const auto &entry = j.at(v.name);
    if (entry.at("shape").get<std::vector<size_t>>() != v.shape) {
      throw Error(ErrorKind::ShapeMismatch, "parameter " + v.name + " has the wrong shape");
    }
    const auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != v.data.size()) throw Error(ErrorKind::ShapeMismatch, "parameter " + v.name + " has the wrong size");
    std::copy(data.begin(), data.end(), v.data.begin());
  }
  if (j.size() != views.size()) throw Error(ErrorKind::ShapeMismatch, "checkpoint has unexpected parameters");
}

void check_version(const nlohmann::json &j) {
  if (j.value("version", -1) != kCheckpointVersion) {
    throw Error(ErrorKind::ParseError, "unsupported checkpoint version");
  }
}

}  // namespace

nlohmann::json checkpoint_to_json(const GtModel &m) {
  GtParams p = m.params;
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = "graph_transformer";
  j["config"] = config_to_json(m.config);
  if (!m.normalizer.empty()) j["normalizer"] = m.normalizer.to_json();
  j["params"] = params_to_json(p.views());
  return j;
}

nlohmann::json checkpoint_to_json(const SimpleNn &m) {
  NnParams p = m.params;
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = "simple_nn";
  j["config"] = {{"input_dim", kBaselineFeatureDim}, {"hidden", m.hidden}, {"activation", "relu"}};
  if (!m.normalizer.empty()) j["normalizer"] = m.normalizer.to_json();
  j["params"] = params_to_json(p.views());
  return j;
}

std::string checkpoint_kind(const nlohmann::json &j) {
  check_version(j);
  return j.value("kind", std::string("graph_transformer"));
}

GtModel gt_from_checkpoint(const nlohmann::json &j) {
  try {
    if (checkpoint_kind(j) != "graph_transformer") throw Error(ErrorKind::ParseError, "not a graph transformer checkpoint");
    GtModel m = init_model(config_from_json(j.at("config")), 0);
    params_from_json(m.params.views(), j.at("params"));
    if (j.contains("normalizer")) m.normalizer = Normalizer::from_json(j["normalizer"]);
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint JSON: ") + e.what());
  }
}

SimpleNn nn_from_checkpoint(const nlohmann::json &j) {
  try {
    if (checkpoint_kind(j) != "simple_nn") throw Error(ErrorKind::ParseError, "not a simple-NN checkpoint");
    SimpleNn m = init_simple_nn(0, j.at("config").value("hidden", size_t{128}));
    params_from_json(m.params.views(), j.at("params"));
    if (j.contains("normalizer")) m.normalizer = Normalizer::from_json(j["normalizer"]);
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("checkpoint JSON: ") + e.what());
  }
}

void save_json(const nlohmann::json &j, const std::filesystem::path &path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  f << j.dump() << '\n';
  if (!f) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

nlohmann::json load_json(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace qrel

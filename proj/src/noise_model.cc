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

#include "qrel/noise_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrel/error.h"
#include "qrel/random.h"

namespace qrel {

double NoiseProfile::gate_error(const Gate &g) const {
  switch (g.kind) {
    case GateKind::SX:
    case GateKind::SXDG: return sx_error[g.qubits[0]];
    case GateKind::X: return x_error[g.qubits[0]];
    case GateKind::CNOT: return cnot_pair_error(g.qubits[0], g.qubits[1]);
    default: return 0.0;
  }
}

double NoiseProfile::gate_duration_ns(const Gate &g) const {
  switch (g.kind) {
    case GateKind::SX:
    case GateKind::SXDG: return sx_duration_ns;
    case GateKind::X: return x_duration_ns;
    case GateKind::CNOT: return cnot_duration_ns;
    case GateKind::MEASURE: return measure_duration_ns;
    default: return 0.0;
  }
}

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(ErrorKind::InvalidProfile, what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void validate_profile(const NoiseProfile &p) {
  const size_t n = p.n_qubits();
  require(n >= 1 && n <= kMaxQubits, "profile must cover 1.." + std::to_string(kMaxQubits) + " qubits");
  require(p.t2_us.size() == n && p.sx_error.size() == n && p.x_error.size() == n &&
              p.readout_error10.size() == n && p.readout_error01.size() == n && p.cnot_error.size() == n * n,
          "per-qubit arrays disagree on the qubit count");
  for (size_t q = 0; q < n; ++q) {
    const std::string at = " on qubit " + std::to_string(q);
    require(p.t1_us[q] > 0 && p.t2_us[q] > 0, "non-positive T1/T2" + at);
    require(p.t2_us[q] <= 2.0 * p.t1_us[q] * (1 + 1e-12), "T2 > 2*T1" + at);
    require(is_probability(p.sx_error[q]) && is_probability(p.x_error[q]) && is_probability(p.readout_error10[q]) &&
                is_probability(p.readout_error01[q]),
            "probability outside [0,1]" + at);
    for (size_t r = 0; r < n; ++r) {
      require(is_probability(p.cnot_error[q * n + r]), "CNOT error outside [0,1]" + at);
      require(p.cnot_error[q * n + r] == p.cnot_error[r * n + q], "CNOT error table is not symmetric" + at);
    }
  }
  require(p.sx_duration_ns > 0 && p.x_duration_ns > 0 && p.cnot_duration_ns > 0 && p.measure_duration_ns > 0,
          "gate durations must be positive");
  require(p.noise_scale > 0, "noise_scale must be positive");
}

NoiseProfile noiseless_profile(size_t n_qubits) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) {
    throw Error(ErrorKind::UnsupportedQubitCount, "noiseless profile for " + std::to_string(n_qubits) + " qubits");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  NoiseProfile p;
  p.profile_id = "noiseless";
  p.t1_us.assign(n_qubits, kInf);
  p.t2_us.assign(n_qubits, kInf);
  p.sx_error.assign(n_qubits, 0.0);
  p.x_error.assign(n_qubits, 0.0);
  p.cnot_error.assign(n_qubits * n_qubits, 0.0);
  p.readout_error10.assign(n_qubits, 0.0);
  p.readout_error01.assign(n_qubits, 0.0);
  return p;
}

NoiseProfile make_profile(size_t n_qubits, uint64_t seed) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) {
    throw Error(ErrorKind::UnsupportedQubitCount, "profile for " + std::to_string(n_qubits) + " qubits");
  }
  Rng rng(mix_seed(seed));
  NoiseProfile p;
  p.profile_id = "synthetic-" + std::to_string(n_qubits) + "q-" + std::to_string(seed);
  const size_t n = n_qubits;
  p.t1_us.resize(n);
  p.t2_us.resize(n);
  p.sx_error.resize(n);
  p.readout_error10.resize(n);
  p.readout_error01.resize(n);
  for (size_t q = 0; q < n; ++q) {
    p.t1_us[q] = uniform(rng, 50.0, 150.0);
    p.t2_us[q] = std::min(uniform(rng, 0.5 * p.t1_us[q], 2.0 * p.t1_us[q]), 2.0 * p.t1_us[q]);
    p.sx_error[q] = uniform(rng, 1e-4, 1e-3);
    p.readout_error10[q] = uniform(rng, 1e-2, 5e-2);
    p.readout_error01[q] = uniform(rng, 1e-2, 5e-2);
  }
  // X is two SX pulses on IBM hardware, so it is calibrated to the same rate.
  p.x_error = p.sx_error;
  p.cnot_error.assign(n * n, 0.0);
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      const double e = uniform(rng, 5e-3, 3e-2);
      p.cnot_error[a * n + b] = e;
      p.cnot_error[b * n + a] = e;
    }
  }
  return p;
}

NoiseProfile scale_profile(const NoiseProfile &p, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::NonPositiveFactor, "noise factor must be positive and finite, got " + std::to_string(factor));
  }
  NoiseProfile out = p;
  if (factor == 1.0) return out;
  auto scale_prob = [factor](std::vector<double> &v) {
    for (double &x : v) x = std::clamp(x * factor, 0.0, 1.0);
  };
  scale_prob(out.sx_error);
  scale_prob(out.x_error);
  scale_prob(out.cnot_error);
  scale_prob(out.readout_error10);
  scale_prob(out.readout_error01);
  for (double &t : out.t1_us) t /= factor;
  for (double &t : out.t2_us) t /= factor;
  out.noise_scale = p.noise_scale * factor;
  return out;
}

namespace {

// JSON has no infinity; a null coherence time means "no decoherence".
nlohmann::json times_to_json(const std::vector<double> &v) {
  auto out = nlohmann::json::array();
  for (double t : v) {
    if (std::isinf(t)) {
      out.push_back(nullptr);
    } else {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<double> times_from_json(const nlohmann::json &j) {
  std::vector<double> out;
  for (const auto &x : j) out.push_back(x.is_null() ? std::numeric_limits<double>::infinity() : x.get<double>());
  return out;
}

}  // namespace

nlohmann::json profile_to_json(const NoiseProfile &p) {
  nlohmann::json j;
  j["profile_id"] = p.profile_id;
  j["noise_scale"] = p.noise_scale;
  j["t1_us"] = times_to_json(p.t1_us);
  j["t2_us"] = times_to_json(p.t2_us);
  j["sx_error"] = p.sx_error;
  j["x_error"] = p.x_error;
  j["cnot_error"] = p.cnot_error;
  j["readout_error10"] = p.readout_error10;
  j["readout_error01"] = p.readout_error01;
  j["gate_duration_ns"] = {{"rz", 0.0},
                           {"sx", p.sx_duration_ns},
                           {"x", p.x_duration_ns},
                           {"cnot", p.cnot_duration_ns},
                           {"measure", p.measure_duration_ns}};
  return j;
}

NoiseProfile profile_from_json(const nlohmann::json &j) {
  NoiseProfile p;
  try {
    p.profile_id = j.value("profile_id", std::string{});
    p.noise_scale = j.value("noise_scale", 1.0);
    p.t1_us = times_from_json(j.at("t1_us"));
    p.t2_us = times_from_json(j.at("t2_us"));
    p.sx_error = j.at("sx_error").get<std::vector<double>>();
    p.x_error = j.at("x_error").get<std::vector<double>>();
    p.cnot_error = j.at("cnot_error").get<std::vector<double>>();
    p.readout_error10 = j.at("readout_error10").get<std::vector<double>>();
    p.readout_error01 = j.at("readout_error01").get<std::vector<double>>();
    if (j.contains("gate_duration_ns")) {
      const auto &d = j["gate_duration_ns"];
      p.sx_duration_ns = d.value("sx", p.sx_duration_ns);
      p.x_duration_ns = d.value("x", p.x_duration_ns);
      p.cnot_duration_ns = d.value("cnot", p.cnot_duration_ns);
      p.measure_duration_ns = d.value("measure", p.measure_duration_ns);
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("profile JSON: ") + e.what());
  }
  validate_profile(p);
  return p;
}

}  // namespace qrel

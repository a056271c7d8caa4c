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

#include "qrel/simulator.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "qrel/error.h"
#include "qrel/random.h"

namespace qrel {

DensityMatrix::DensityMatrix(size_t n_qubits)
    : n_qubits_(n_qubits), dim_(size_t{1} << n_qubits), data_(dim_ * dim_, Complex(0.0, 0.0)) {
  if (n_qubits == 0 || n_qubits > kMaxQubits) {
    throw Error(ErrorKind::UnsupportedQubitCount, "density matrix over " + std::to_string(n_qubits) + " qubits");
  }
  data_[0] = 1.0;
}

DensityMatrix DensityMatrix::from_pure(std::span<const Complex> psi) {
  size_t n = 0;
  while ((size_t{1} << n) < psi.size()) ++n;
  if ((size_t{1} << n) != psi.size()) throw Error(ErrorKind::ShapeMismatch, "state length is not a power of two");
  DensityMatrix rho(n);
  for (size_t r = 0; r < rho.dim_; ++r) {
    for (size_t c = 0; c < rho.dim_; ++c) rho(r, c) = psi[r] * std::conj(psi[c]);
  }
  return rho;
}

Complex DensityMatrix::trace() const {
  Complex t = 0.0;
  for (size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double DensityMatrix::hermiticity_defect() const {
  double worst = 0.0;
  for (size_t r = 0; r < dim_; ++r) {
    for (size_t c = r; c < dim_; ++c) worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  }
  return worst;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::MatrixXcd m(dim_, dim_);
  for (size_t r = 0; r < dim_; ++r) {
    for (size_t c = 0; c < dim_; ++c) m(r, c) = (*this)(r, c);
  }
  const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

KrausChannel::KrausChannel(size_t arity, std::vector<Eigen::MatrixXcd> ops) : arity_(arity), ops_(std::move(ops)) {
  const Eigen::Index d = Eigen::Index{1} << arity_;
  if (arity_ < 1 || arity_ > 2 || ops_.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "channels act on one or two qubits with at least one Kraus operator");
  }
  for (const auto &k : ops_) {
    if (k.rows() != d || k.cols() != d) throw Error(ErrorKind::ShapeMismatch, "Kraus operator has the wrong size");
  }
  const double defect = completeness_defect();
  if (!(defect <= kKrausTolerance)) {
    throw Error(ErrorKind::InvalidProbability,
                "Kraus operators are not trace preserving (defect " + std::to_string(defect) + ")");
  }
}

double KrausChannel::completeness_defect() const {
  const Eigen::Index d = Eigen::Index{1} << arity_;
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
  for (const auto &k : ops_) sum += k.adjoint() * k;
  return (sum - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

const std::array<Eigen::MatrixXcd, 4> &paulis() {
  static const std::array<Eigen::MatrixXcd, 4> p = [] {
    const Complex i(0.0, 1.0);
    std::array<Eigen::MatrixXcd, 4> out;
    out[0] = Eigen::MatrixXcd::Identity(2, 2);
    out[1] = Eigen::MatrixXcd(2, 2);
    out[1] << 0, 1, 1, 0;
    out[2] = Eigen::MatrixXcd(2, 2);
    out[2] << 0, -i, i, 0;
    out[3] = Eigen::MatrixXcd(2, 2);
    out[3] << 1, 0, 0, -1;
    return out;
  }();
  return p;
}

void require_probability(double p, const char *what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidProbability, std::string(what) + " must lie in [0,1], got " + std::to_string(p));
  }
}

}  // namespace

Eigen::MatrixXcd KrausChannel::superoperator() const {
  const Eigen::Index d = Eigen::Index{1} << arity_;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (const auto &k : ops_) s += kron(k, k.conjugate());
  return s;
}

Eigen::MatrixXcd gate_unitary(const Gate &g) {
  const Complex i(0.0, 1.0);
  Eigen::MatrixXcd u;
  switch (g.kind) {
    case GateKind::RZ:
      u = Eigen::MatrixXcd::Zero(2, 2);
      u(0, 0) = std::exp(-i * (g.param / 2.0));
      u(1, 1) = std::exp(i * (g.param / 2.0));
      return u;
    case GateKind::SX:
      u = Eigen::MatrixXcd(2, 2);
      u << 0.5 * (1.0 + i), 0.5 * (1.0 - i), 0.5 * (1.0 - i), 0.5 * (1.0 + i);
      return u;
    case GateKind::SXDG:
      u = Eigen::MatrixXcd(2, 2);
      u << 0.5 * (1.0 - i), 0.5 * (1.0 + i), 0.5 * (1.0 + i), 0.5 * (1.0 - i);
      return u;
    case GateKind::X: return paulis()[1];
    case GateKind::CNOT:
      u = Eigen::MatrixXcd::Zero(4, 4);
      u(0, 0) = 1.0;
      u(1, 1) = 1.0;
      u(2, 3) = 1.0;
      u(3, 2) = 1.0;
      return u;
    default: throw Error(ErrorKind::InvalidGate, gate_kind_name(g.kind) + " has no unitary");
  }
}

KrausChannel unitary_channel(const Eigen::MatrixXcd &u) {
  const size_t arity = u.rows() == 2 ? 1 : 2;
  return KrausChannel(arity, {u});
}

KrausChannel depolarizing_channel(size_t arity, double p) {
  require_probability(p, "depolarizing probability");
  std::vector<Eigen::MatrixXcd> ops;
  if (arity == 1) {
    ops.push_back(std::sqrt(1.0 - p) * paulis()[0]);
    for (size_t a = 1; a < 4; ++a) ops.push_back(std::sqrt(p / 3.0) * paulis()[a]);
  } else if (arity == 2) {
    for (size_t a = 0; a < 4; ++a) {
      for (size_t b = 0; b < 4; ++b) {
        const double w = (a == 0 && b == 0) ? 1.0 - p : p / 15.0;
        ops.push_back(std::sqrt(w) * kron(paulis()[a], paulis()[b]));
      }
    }
  } else {
    throw Error(ErrorKind::ShapeMismatch, "depolarizing channel arity must be 1 or 2");
  }
  return KrausChannel(arity, std::move(ops));
}

KrausChannel amplitude_damping_channel(double gamma) {
  require_probability(gamma, "amplitude damping gamma");
  Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  return KrausChannel(1, {k0, k1});
}

KrausChannel phase_damping_channel(double lambda) {
  require_probability(lambda, "phase damping lambda");
  Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - lambda);
  k1(1, 1) = std::sqrt(lambda);
  return KrausChannel(1, {k0, k1});
}

KrausChannel thermal_relaxation_channel(double duration_ns, double t1_us, double t2_us) {
  if (!(t1_us > 0) || !(t2_us > 0) || t2_us > 2.0 * t1_us * (1 + 1e-12)) {
    throw Error(ErrorKind::InvalidProfile, "thermal relaxation needs 0 < T2 <= 2*T1");
  }
  const double t_us = duration_ns * 1e-3;
  const double gamma = -std::expm1(-t_us / t1_us);
  const double inv_tphi = std::max(0.0, 1.0 / t2_us - 0.5 / t1_us);
  const double lambda = -std::expm1(-2.0 * t_us * inv_tphi);
  const KrausChannel ad = amplitude_damping_channel(gamma);
  const KrausChannel pd = phase_damping_channel(lambda);
  std::vector<Eigen::MatrixXcd> ops;
  for (const auto &p : pd.ops()) {
    for (const auto &a : ad.ops()) ops.push_back(p * a);
  }
  return KrausChannel(1, std::move(ops));
}

KrausChannel embed_in_pair(const KrausChannel &single, size_t slot) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
  std::vector<Eigen::MatrixXcd> ops;
  for (const auto &k : single.ops()) ops.push_back(slot == 0 ? kron(k, id) : kron(id, k));
  return KrausChannel(2, std::move(ops));
}

std::vector<KrausChannel> gate_channels(const Gate &g, const NoiseProfile &p, bool noisy) {
  if (g.kind == GateKind::BARRIER || g.kind == GateKind::MEASURE) return {};
  std::vector<KrausChannel> out;
  out.push_back(unitary_channel(gate_unitary(g)));
  if (!noisy) return out;
  const size_t arity = g.qubits.size();
  const double err = p.gate_error(g);
  if (err > 0.0) out.push_back(depolarizing_channel(arity, err));
  const double t = p.gate_duration_ns(g);
  if (t > 0.0) {
    for (size_t slot = 0; slot < arity; ++slot) {
      const uint32_t q = g.qubits[slot];
      KrausChannel relax = thermal_relaxation_channel(t, p.t1_us[q], p.t2_us[q]);
      out.push_back(arity == 1 ? std::move(relax) : embed_in_pair(relax, slot));
    }
  }
  return out;
}

void apply_superoperator(DensityMatrix &rho, std::span<const uint32_t> qubits, const Eigen::MatrixXcd &super) {
  const size_t arity = qubits.size();
  const size_t local = size_t{1} << arity;
  const size_t block = local * local;
  if (arity < 1 || arity > 2 || static_cast<size_t>(super.rows()) != block ||
      static_cast<size_t>(super.cols()) != block) {
    throw Error(ErrorKind::ShapeMismatch, "superoperator does not match the qubit count");
  }
  for (uint32_t q : qubits) {
    if (q >= rho.n_qubits()) throw Error(ErrorKind::IndexOutOfRange, "superoperator on qubit " + std::to_string(q));
  }

  // Offsets of the local basis states; the first listed qubit is the most
  // significant local bit.
  std::array<size_t, 4> offset{};
  size_t mask = 0;
  for (size_t li = 0; li < local; ++li) {
    size_t off = 0;
    for (size_t k = 0; k < arity; ++k) {
      if ((li >> (arity - 1 - k)) & 1) off |= size_t{1} << qubits[k];
    }
    offset[li] = off;
  }
  for (uint32_t q : qubits) mask |= size_t{1} << q;

  std::array<Complex, 256> s{};
  for (size_t a = 0; a < block; ++a) {
    for (size_t b = 0; b < block; ++b) s[a * block + b] = super(a, b);
  }

  const size_t dim = rho.dim();
  Complex *data = rho.data().data();
  std::array<Complex, 16> in{};
  std::array<size_t, 16> where{};
  for (size_t r = 0; r < dim; ++r) {
    if (r & mask) continue;
    for (size_t c = 0; c < dim; ++c) {
      if (c & mask) continue;
      for (size_t i = 0; i < local; ++i) {
        for (size_t j = 0; j < local; ++j) {
          const size_t idx = (r | offset[i]) * dim + (c | offset[j]);
          where[i * local + j] = idx;
          in[i * local + j] = data[idx];
        }
      }
      for (size_t a = 0; a < block; ++a) {
        Complex acc = 0.0;
        const Complex *row = &s[a * block];
        for (size_t b = 0; b < block; ++b) acc += row[b] * in[b];
        data[where[a]] = acc;
      }
    }
  }
}

void apply_gate(DensityMatrix &rho, const Gate &g, const NoiseProfile &p, bool noisy) {
  const std::vector<KrausChannel> channels = gate_channels(g, p, noisy);
  if (channels.empty()) return;
  Eigen::MatrixXcd total = channels.front().superoperator();
  for (size_t k = 1; k < channels.size(); ++k) total = channels[k].superoperator() * total;
  apply_superoperator(rho, g.qubits, total);
}

DensityMatrix simulate_density(const Circuit &c, const NoiseProfile &p, bool noisy) {
  if (noisy) {
    validate_profile(p);
    if (p.n_qubits() != c.n_qubits()) {
      throw Error(ErrorKind::ProfileMismatch, "profile covers " + std::to_string(p.n_qubits()) +
                                                  " qubits, circuit has " + std::to_string(c.n_qubits()));
    }
  }
  DensityMatrix rho(c.n_qubits());
  for (const Gate &g : c.gates()) apply_gate(rho, g, p, noisy);
  return rho;
}

std::vector<Complex> simulate_statevector(const Circuit &c) {
  const size_t dim = size_t{1} << c.n_qubits();
  std::vector<Complex> psi(dim, 0.0);
  psi[0] = 1.0;
  for (const Gate &g : c.gates()) {
    if (g.kind == GateKind::BARRIER || g.kind == GateKind::MEASURE) continue;
    const Eigen::MatrixXcd u = gate_unitary(g);
    if (g.qubits.size() == 1) {
      const size_t bit = size_t{1} << g.qubits[0];
      for (size_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const Complex a = psi[i], b = psi[i | bit];
        psi[i] = u(0, 0) * a + u(0, 1) * b;
        psi[i | bit] = u(1, 0) * a + u(1, 1) * b;
      }
    } else {
      const size_t hi = size_t{1} << g.qubits[0];
      const size_t lo = size_t{1} << g.qubits[1];
      const std::array<size_t, 4> off = {0, lo, hi, hi | lo};
      for (size_t i = 0; i < dim; ++i) {
        if (i & (hi | lo)) continue;
        std::array<Complex, 4> v{};
        for (size_t k = 0; k < 4; ++k) v[k] = psi[i | off[k]];
        for (size_t r = 0; r < 4; ++r) {
          Complex acc = 0.0;
          for (size_t k = 0; k < 4; ++k) acc += u(r, k) * v[k];
          psi[i | off[r]] = acc;
        }
      }
    }
  }
  return psi;
}

double all_zero_probability(const DensityMatrix &rho, const NoiseProfile &p, bool with_readout) {
  double prob = 0.0;
  if (!with_readout) {
    prob = rho(0, 0).real();
  } else {
    if (p.n_qubits() != rho.n_qubits()) {
      throw Error(ErrorKind::ProfileMismatch, "readout profile does not match the register size");
    }
    const size_t n = rho.n_qubits();
    for (size_t z = 0; z < rho.dim(); ++z) {
      double w = rho(z, z).real();
      for (size_t q = 0; q < n && w != 0.0; ++q) {
        w *= ((z >> q) & 1) ? p.readout_error01[q] : 1.0 - p.readout_error10[q];
      }
      prob += w;
    }
  }
  return std::clamp(prob, 0.0, 1.0);
}

double sample_pst(double p0, uint64_t shots, uint64_t seed) {
  if (shots == 0) throw Error(ErrorKind::ZeroShots, "PST needs at least one shot");
  require_probability(p0, "all-zero probability");
  Rng rng(mix_seed(seed));
  std::binomial_distribution<uint64_t> draw(shots, p0);
  return static_cast<double>(draw(rng)) / static_cast<double>(shots);
}

double state_fidelity(const Circuit &c, const NoiseProfile &p) {
  for (const Gate &g : c.gates()) {
    if (g.kind == GateKind::MEASURE) throw Error(ErrorKind::ContainsMeasurement, "fidelity of a measured circuit");
  }
  const std::vector<Complex> psi = simulate_statevector(c);
  const DensityMatrix rho = simulate_density(c, p, true);
  const size_t dim = rho.dim();
  Complex f = 0.0;
  for (size_t r = 0; r < dim; ++r) {
    if (psi[r] == 0.0) continue;
    Complex row = 0.0;
    for (size_t col = 0; col < dim; ++col) row += rho(r, col) * psi[col];
    f += std::conj(psi[r]) * row;
  }
  return std::clamp(f.real(), 0.0, 1.0);
}

}  // namespace qrel

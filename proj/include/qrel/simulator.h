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

#ifndef QREL_SIMULATOR_H
#define QREL_SIMULATOR_H

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qrel/circuit.h"
#include "qrel/noise_model.h"

namespace qrel {

using Complex = std::complex<double>;

/// Kraus completeness tolerance enforced when a channel is constructed.
constexpr double kKrausTolerance = 1e-12;

/// Dense 2^n x 2^n density matrix. Basis index bit q is qubit q.
class DensityMatrix {
 public:
  /// |0...0><0...0|.
  explicit DensityMatrix(size_t n_qubits);
  static DensityMatrix from_pure(std::span<const Complex> psi);

  size_t n_qubits() const { return n_qubits_; }
  size_t dim() const { return dim_; }
  Complex &operator()(size_t r, size_t c) { return data_[r * dim_ + c]; }
  const Complex &operator()(size_t r, size_t c) const { return data_[r * dim_ + c]; }
  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  Complex trace() const;
  /// max |rho - rho^dagger| over entries.
  double hermiticity_defect() const;
  double min_eigenvalue() const;

 private:
  size_t n_qubits_;
  size_t dim_;
  std::vector<Complex> data_;
};

/// Completely positive trace-preserving map on 1 or 2 qubits, given by its
/// Kraus operators. Construction throws Error{InvalidProbability} unless
/// sum K^dagger K = I within kKrausTolerance.
class KrausChannel {
 public:
  KrausChannel(size_t arity, std::vector<Eigen::MatrixXcd> ops);

  size_t arity() const { return arity_; }
  const std::vector<Eigen::MatrixXcd> &ops() const { return ops_; }
  double completeness_defect() const;
  /// Superoperator in row-major vec ordering: vec(rho)[i * d + j] = rho_ij.
  Eigen::MatrixXcd superoperator() const;

 private:
  size_t arity_;
  std::vector<Eigen::MatrixXcd> ops_;
};

/// Ideal unitary of a basis (or SXDG) gate. Two-qubit local index is
/// 2 * bit(qubits[0]) + bit(qubits[1]).
Eigen::MatrixXcd gate_unitary(const Gate &g);

KrausChannel unitary_channel(const Eigen::MatrixXcd &u);
/// Kraus set {sqrt(1-p) I, sqrt(p/(4^k-1)) P} over the non-identity k-qubit
/// Paulis P.
KrausChannel depolarizing_channel(size_t arity, double p);
KrausChannel amplitude_damping_channel(double gamma);
KrausChannel phase_damping_channel(double lambda);
/// Amplitude damping with gamma = 1 - exp(-t/T1) followed by phase damping
/// with lambda = 1 - exp(-2t/T_phi), 1/T_phi = 1/T2 - 1/(2 T1).
KrausChannel thermal_relaxation_channel(double duration_ns, double t1_us, double t2_us);
/// Lifts a single-qubit channel onto slot 0 or 1 of a two-qubit register.
KrausChannel embed_in_pair(const KrausChannel &single, size_t slot);

/// The channels a gate applies in order: unitary, depolarizing, relaxation
/// on each touched qubit. Noiseless mode returns the unitary only.
std::vector<KrausChannel> gate_channels(const Gate &g, const NoiseProfile &p, bool noisy);

/// Applies a 1- or 2-qubit superoperator in place.
void apply_superoperator(DensityMatrix &rho, std::span<const uint32_t> qubits, const Eigen::MatrixXcd &super);

/// Applies one gate (and its noise when `noisy`). BARRIER and MEASURE leave
/// rho unchanged.
void apply_gate(DensityMatrix &rho, const Gate &g, const NoiseProfile &p, bool noisy);

/// Evolves |0...0> through the circuit. Throws Error{ProfileMismatch} when
/// the profile covers a different qubit count and Error{InvalidProfile} on a
/// broken profile.
DensityMatrix simulate_density(const Circuit &c, const NoiseProfile &p, bool noisy);

/// Noiseless statevector of the circuit applied to |0...0>.
std::vector<Complex> simulate_statevector(const Circuit &c);

/// Probability that every qubit reads 0, optionally through the per-qubit
/// readout confusion matrices. Clamped to [0, 1].
double all_zero_probability(const DensityMatrix &rho, const NoiseProfile &p, bool with_readout);

/// Binomial(shots, p0) / shots.
double sample_pst(double p0, uint64_t shots, uint64_t seed);

/// <psi|rho|psi> with psi the ideal output of `c` and rho its noisy output.
/// Readout error is not involved.
double state_fidelity(const Circuit &c, const NoiseProfile &p);

}  // namespace qrel

#endif  // QREL_SIMULATOR_H

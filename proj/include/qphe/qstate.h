/* Copyright 2026 The QPHE-NMR Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Dense state-vector / density-matrix substrate.
//
// Qubits are 0-based. Basis index b = sum_k q_k * 2^(n-1-k), so qubit 0 is the
// most significant bit and the printed bitstring "q0 q1 ... q(n-1)" reads in
// declaration order. When an ancilla is present it is always the last qubit.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qphe {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

namespace tol {
/// Structural checks: unitarity, projector idempotence, Hermiticity.
inline constexpr double kStructural = 1e-10;
/// Arithmetic comparisons: norms, traces, probabilities.
inline constexpr double kArithmetic = 1e-12;
}  // namespace tol

inline constexpr Complex kI{0.0, 1.0};

std::size_t index_of_bits(std::string_view bits);
std::string bits_of_index(std::size_t index, int width);

class StateVector {
 public:
  StateVector(int n_qubits, CVector amplitudes);

  static StateVector basis(int n_qubits, std::size_t index);
  /// "0101" -> |0101>.
  static StateVector from_bits(std::string_view bits);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

  double norm() const { return amplitudes_.norm(); }
  StateVector normalized() const;

 private:
  int n_qubits_;
  CVector amplitudes_;
};

/// Deviation matrices (traceless, not positive) are flagged rather than typed
/// separately; every linear observable treats both identically.
class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, CMatrix matrix, bool is_deviation = false);

  static DensityMatrix from_pure(const StateVector& psi);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const CMatrix& matrix() const { return matrix_; }
  bool is_deviation() const { return is_deviation_; }
  Complex trace() const { return matrix_.trace(); }
  Complex operator()(std::size_t r, std::size_t c) const {
    return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

 private:
  int n_qubits_;
  CMatrix matrix_;
  bool is_deviation_;
};

enum class OperatorKind { kUnitary, kProjector, kHermitian, kGeneral };

class Operator {
 public:
  /// Validates the invariant implied by `kind` at kStructural.
  explicit Operator(CMatrix matrix, OperatorKind kind = OperatorKind::kGeneral);

  static Operator identity(int n_qubits);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  int n_qubits() const { return n_qubits_; }
  const CMatrix& matrix() const { return matrix_; }
  OperatorKind kind() const { return kind_; }
  Complex operator()(std::size_t r, std::size_t c) const {
    return matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  Operator adjoint() const;
  bool is_hermitian(double tolerance = tol::kStructural) const;
  bool is_unitary(double tolerance = tol::kStructural) const;

 private:
  CMatrix matrix_;
  OperatorKind kind_;
  int n_qubits_;
};

/// Matrix product a*b (b acts first). Unitary if both factors are.
Operator operator*(const Operator& a, const Operator& b);

namespace gates {
Operator hadamard();
/// diag(1, i): the quarter-wave phase shifter.
Operator phase_s();
Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
/// Control is the first (most significant) qubit.
Operator cnot();
}  // namespace gates

namespace states {
StateVector zero();
StateVector one();
StateVector plus();
StateVector minus();
StateVector plus_i();
StateVector minus_i();
}  // namespace states

StateVector tensor(const StateVector& a, const StateVector& b);
StateVector tensor(const std::vector<StateVector>& factors);
Operator tensor(const Operator& a, const Operator& b);
Operator tensor(const std::vector<Operator>& factors);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Lifts `op` acting on `targets` (in op's own qubit order) to an n-qubit operator.
Operator embed(const Operator& op, const std::vector<int>& targets, int n_qubits);

StateVector apply(const Operator& op, const std::vector<int>& targets, const StateVector& state);
/// rho -> O rho O^dagger.
DensityMatrix apply(const Operator& op, const std::vector<int>& targets,
                    const DensityMatrix& state);

double expectation(const Operator& op, const StateVector& state);
double expectation(const Operator& op, const DensityMatrix& state);

/// <bra|op|ket>, no normalization.
Complex overlap(const StateVector& bra, const Operator& op, const StateVector& ket);

/// Reduced state on `keep`, in the order given.
DensityMatrix partial_trace(const DensityMatrix& state, const std::vector<int>& keep);

struct ProbabilityTable {
  std::vector<int> qubits;
  /// Indexed like a basis state over `qubits` (first listed is most significant).
  std::vector<double> probabilities;

  double at(std::string_view bits) const;
  double total() const;
};

ProbabilityTable measure_distribution(const StateVector& state, const std::vector<int>& qubits);
ProbabilityTable measure_distribution(const DensityMatrix& state, const std::vector<int>& qubits);

/// |<a|b>|^2 for normalized inputs; insensitive to global phase.
double state_fidelity(const StateVector& a, const StateVector& b);

}  // namespace qphe

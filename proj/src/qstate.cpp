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

#include "qphe/qstate.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qphe {

namespace {

constexpr int kMaxQubits = 16;

std::size_t dim_for(int n_qubits) { return std::size_t{1} << n_qubits; }

int qubits_for_dim(std::size_t dim) {
  if (dim == 0 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  return n;
}

void check_targets(const std::vector<int>& targets, int n_qubits) {
  for (std::size_t a = 0; a < targets.size(); ++a) {
    if (targets[a] < 0 || targets[a] >= n_qubits) {
      throw std::out_of_range("qubit " + std::to_string(targets[a]) + " out of range for " +
                              std::to_string(n_qubits) + " qubits");
    }
    for (std::size_t b = a + 1; b < targets.size(); ++b) {
      if (targets[a] == targets[b]) {
        throw std::invalid_argument("duplicate target qubit " + std::to_string(targets[a]));
      }
    }
  }
}

// Bit mask of qubit q inside an n-qubit basis index.
std::size_t mask_of(int q, int n_qubits) { return std::size_t{1} << (n_qubits - 1 - q); }

// Local index of `full` restricted to `qubits` (first listed = most significant).
std::size_t gather_bits(std::size_t full, const std::vector<int>& qubits, int n_qubits) {
  std::size_t local = 0;
  for (int q : qubits) local = (local << 1) | ((full & mask_of(q, n_qubits)) ? 1u : 0u);
  return local;
}

std::size_t scatter_bits(std::size_t local, const std::vector<int>& qubits, int n_qubits) {
  std::size_t full = 0;
  const auto k = qubits.size();
  for (std::size_t m = 0; m < k; ++m) {
    if ((local >> (k - 1 - m)) & 1u) full |= mask_of(qubits[m], n_qubits);
  }
  return full;
}

std::size_t mask_of_all(const std::vector<int>& qubits, int n_qubits) {
  std::size_t mask = 0;
  for (int q : qubits) mask |= mask_of(q, n_qubits);
  return mask;
}

void check_op_fits(const Operator& op, const std::vector<int>& targets) {
  if (op.dim() != dim_for(static_cast<int>(targets.size()))) {
    throw std::invalid_argument("operator of dimension " + std::to_string(op.dim()) +
                                " applied to " + std::to_string(targets.size()) + " targets");
  }
}

}  // namespace

std::size_t index_of_bits(std::string_view bits) {
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bad bitstring '" + std::string(bits) + "'");
    index = (index << 1) | static_cast<std::size_t>(c - '0');
  }
  return index;
}

std::string bits_of_index(std::size_t index, int width) {
  std::string out(static_cast<std::size_t>(width), '0');
  for (int k = 0; k < width; ++k) {
    if ((index >> (width - 1 - k)) & 1u) out[static_cast<std::size_t>(k)] = '1';
  }
  return out;
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(int n_qubits, CVector amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
  if (n_qubits < 0 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("unsupported qubit count " + std::to_string(n_qubits));
  }
  if (static_cast<std::size_t>(amplitudes_.size()) != dim_for(n_qubits)) {
    throw std::invalid_argument("amplitude vector length does not equal 2^n");
  }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
  if (n_qubits < 0 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("unsupported qubit count " + std::to_string(n_qubits));
  }
  if (index >= dim_for(n_qubits)) throw std::out_of_range("basis index out of range");
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim_for(n_qubits)));
  amps(static_cast<Eigen::Index>(index)) = 1.0;
  return {n_qubits, std::move(amps)};
}

StateVector StateVector::from_bits(std::string_view bits) {
  return basis(static_cast<int>(bits.size()), index_of_bits(bits));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
  return {n_qubits_, amplitudes_ / n};
}

// -------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(int n_qubits, CMatrix matrix, bool is_deviation)
    : n_qubits_(n_qubits), matrix_(std::move(matrix)), is_deviation_(is_deviation) {
  if (n_qubits < 0 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("unsupported qubit count " + std::to_string(n_qubits));
  }
  const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw std::invalid_argument("density matrix is not 2^n x 2^n");
  }
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol::kStructural * scale) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  return {psi.n_qubits(), psi.amplitudes() * psi.amplitudes().adjoint()};
}

// ------------------------------------------------------------------- Operator

Operator::Operator(CMatrix matrix, OperatorKind kind) : matrix_(std::move(matrix)), kind_(kind) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("operator matrix not square");
  n_qubits_ = qubits_for_dim(static_cast<std::size_t>(matrix_.rows()));
  switch (kind_) {
    case OperatorKind::kUnitary:
      if (!is_unitary()) throw std::invalid_argument("operator tagged unitary is not unitary");
      break;
    case OperatorKind::kProjector:
      if (!is_hermitian() ||
          (matrix_ * matrix_ - matrix_).cwiseAbs().maxCoeff() > tol::kStructural) {
        throw std::invalid_argument("operator tagged projector is not a projector");
      }
      break;
    case OperatorKind::kHermitian:
      if (!is_hermitian()) throw std::invalid_argument("operator tagged Hermitian is not Hermitian");
      break;
    case OperatorKind::kGeneral:
      break;
  }
}

Operator Operator::identity(int n_qubits) {
  const auto d = static_cast<Eigen::Index>(dim_for(n_qubits));
  return Operator(CMatrix::Identity(d, d), OperatorKind::kUnitary);
}

Operator Operator::adjoint() const {
  OperatorKind k = kind_;
  if (k == OperatorKind::kProjector || k == OperatorKind::kHermitian || k == OperatorKind::kUnitary) {
    return Operator(matrix_.adjoint(), k);
  }
  return Operator(matrix_.adjoint(), OperatorKind::kGeneral);
}

bool Operator::is_hermitian(double tolerance) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

bool Operator::is_unitary(double tolerance) const {
  const auto d = matrix_.rows();
  return (matrix_.adjoint() * matrix_ - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= tolerance;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch in product");
  const bool unitary = a.kind() == OperatorKind::kUnitary && b.kind() == OperatorKind::kUnitary;
  CMatrix m = a.matrix() * b.matrix();
  if (unitary) {
    // Long products drift; only retag when the result still passes the check.
    Operator candidate(m, OperatorKind::kGeneral);
    if (candidate.is_unitary()) return Operator(std::move(m), OperatorKind::kUnitary);
    return candidate;
  }
  return Operator(std::move(m), OperatorKind::kGeneral);
}

namespace gates {

Operator hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix m(2, 2);
  m << r, r, r, -r;
  return Operator(m, OperatorKind::kUnitary);
}

Operator phase_s() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, kI;
  return Operator(m, OperatorKind::kUnitary);
}

Operator pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return Operator(m, OperatorKind::kUnitary);
}

Operator pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return Operator(m, OperatorKind::kUnitary);
}

Operator pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return Operator(m, OperatorKind::kUnitary);
}

Operator cnot() {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 3) = 1.0;
  m(3, 2) = 1.0;
  return Operator(m, OperatorKind::kUnitary);
}

}  // namespace gates

namespace states {

namespace {
StateVector qubit(Complex a0, Complex a1) {
  CVector v(2);
  v << a0, a1;
  return {1, std::move(v)};
}
const double kR = 1.0 / std::sqrt(2.0);
}  // namespace

StateVector zero() { return qubit(1.0, 0.0); }
StateVector one() { return qubit(0.0, 1.0); }
StateVector plus() { return qubit(kR, kR); }
StateVector minus() { return qubit(kR, -kR); }
StateVector plus_i() { return qubit(kR, kI * kR); }
StateVector minus_i() { return qubit(kR, -kI * kR); }

}  // namespace states

// --------------------------------------------------------------------- tensor

StateVector tensor(const StateVector& a, const StateVector& b) {
  CVector out(static_cast<Eigen::Index>(a.dim() * b.dim()));
  const auto db = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    out.segment(i * db, db) = a.amplitudes()(i) * b.amplitudes();
  }
  return {a.n_qubits() + b.n_qubits(), std::move(out)};
}

StateVector tensor(const std::vector<StateVector>& factors) {
  if (factors.empty()) throw std::invalid_argument("tensor of an empty list");
  StateVector acc = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) acc = tensor(acc, factors[k]);
  return acc;
}

namespace {
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}
}  // namespace

Operator tensor(const Operator& a, const Operator& b) {
  OperatorKind kind = OperatorKind::kGeneral;
  if (a.kind() == b.kind() && a.kind() != OperatorKind::kGeneral) kind = a.kind();
  return Operator(kron(a.matrix(), b.matrix()), kind);
}

Operator tensor(const std::vector<Operator>& factors) {
  if (factors.empty()) throw std::invalid_argument("tensor of an empty list");
  Operator acc = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) acc = tensor(acc, factors[k]);
  return acc;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return {a.n_qubits() + b.n_qubits(), kron(a.matrix(), b.matrix()),
          a.is_deviation() || b.is_deviation()};
}

// ---------------------------------------------------------------------- apply

Operator embed(const Operator& op, const std::vector<int>& targets, int n_qubits) {
  check_targets(targets, n_qubits);
  check_op_fits(op, targets);
  const std::size_t d = dim_for(n_qubits);
  const std::size_t rest = ~mask_of_all(targets, n_qubits) & (d - 1);
  CMatrix full = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t lr = gather_bits(r, targets, n_qubits);
    const std::size_t base = r & rest;
    for (std::size_t lc = 0; lc < op.dim(); ++lc) {
      const std::size_t c = base | scatter_bits(lc, targets, n_qubits);
      full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = op(lr, lc);
    }
  }
  OperatorKind kind = op.kind();
  return Operator(std::move(full), kind);
}

StateVector apply(const Operator& op, const std::vector<int>& targets, const StateVector& state) {
  const int n = state.n_qubits();
  check_targets(targets, n);
  check_op_fits(op, targets);
  const std::size_t d = state.dim();
  const std::size_t target_mask = mask_of_all(targets, n);
  const std::size_t local_dim = op.dim();

  std::vector<std::size_t> offsets(local_dim);
  for (std::size_t l = 0; l < local_dim; ++l) offsets[l] = scatter_bits(l, targets, n);

  CVector out = state.amplitudes();
  CVector local(static_cast<Eigen::Index>(local_dim));
  for (std::size_t base = 0; base < d; ++base) {
    if (base & target_mask) continue;
    for (std::size_t l = 0; l < local_dim; ++l) {
      local(static_cast<Eigen::Index>(l)) = state[base | offsets[l]];
    }
    const CVector mapped = op.matrix() * local;
    for (std::size_t l = 0; l < local_dim; ++l) {
      out(static_cast<Eigen::Index>(base | offsets[l])) = mapped(static_cast<Eigen::Index>(l));
    }
  }
  return {n, std::move(out)};
}

DensityMatrix apply(const Operator& op, const std::vector<int>& targets,
                    const DensityMatrix& state) {
  const Operator full = embed(op, targets, state.n_qubits());
  CMatrix rho = full.matrix() * state.matrix() * full.matrix().adjoint();
  // Strip the anti-Hermitian rounding residue.
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {state.n_qubits(), std::move(rho), state.is_deviation()};
}

// -------------------------------------------------------------- observables

namespace {
double real_or_throw(Complex value) {
  if (std::abs(value.imag()) > tol::kStructural * std::max(1.0, std::abs(value.real()))) {
    throw std::domain_error("expectation value has a non-negligible imaginary part");
  }
  return value.real();
}

void check_hermitian_fits(const Operator& op, std::size_t dim) {
  if (!op.is_hermitian()) throw std::invalid_argument("expectation of a non-Hermitian operator");
  if (op.dim() != dim) throw std::invalid_argument("operator/state dimension mismatch");
}
}  // namespace

double expectation(const Operator& op, const StateVector& state) {
  check_hermitian_fits(op, state.dim());
  return real_or_throw(state.amplitudes().dot(op.matrix() * state.amplitudes()));
}

double expectation(const Operator& op, const DensityMatrix& state) {
  check_hermitian_fits(op, state.dim());
  return real_or_throw((state.matrix() * op.matrix()).trace());
}

Complex overlap(const StateVector& bra, const Operator& op, const StateVector& ket) {
  if (bra.dim() != op.dim() || ket.dim() != op.dim()) {
    throw std::invalid_argument("overlap dimension mismatch");
  }
  // Eigen's dot conjugates its left operand.
  return bra.amplitudes().dot(op.matrix() * ket.amplitudes());
}

DensityMatrix partial_trace(const DensityMatrix& state, const std::vector<int>& keep) {
  const int n = state.n_qubits();
  if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept qubit");
  check_targets(keep, n);
  const std::size_t d = state.dim();
  const std::size_t traced_mask = ~mask_of_all(keep, n) & (d - 1);
  const int k = static_cast<int>(keep.size());
  const auto dk = static_cast<Eigen::Index>(dim_for(k));
  CMatrix reduced = CMatrix::Zero(dk, dk);
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t lr = gather_bits(r, keep, n);
    for (std::size_t c = 0; c < d; ++c) {
      if ((r & traced_mask) != (c & traced_mask)) continue;
      reduced(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(gather_bits(c, keep, n))) +=
          state(r, c);
    }
  }
  return {k, std::move(reduced), state.is_deviation()};
}

double ProbabilityTable::at(std::string_view bits) const {
  if (bits.size() != qubits.size()) throw std::invalid_argument("outcome length mismatch");
  return probabilities.at(index_of_bits(bits));
}

double ProbabilityTable::total() const {
  return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

ProbabilityTable measure_distribution(const StateVector& state, const std::vector<int>& qubits) {
  check_targets(qubits, state.n_qubits());
  ProbabilityTable table{qubits, std::vector<double>(dim_for(static_cast<int>(qubits.size())), 0.0)};
  for (std::size_t b = 0; b < state.dim(); ++b) {
    table.probabilities[gather_bits(b, qubits, state.n_qubits())] += std::norm(state[b]);
  }
  return table;
}

ProbabilityTable measure_distribution(const DensityMatrix& state, const std::vector<int>& qubits) {
  check_targets(qubits, state.n_qubits());
  ProbabilityTable table{qubits, std::vector<double>(dim_for(static_cast<int>(qubits.size())), 0.0)};
  for (std::size_t b = 0; b < state.dim(); ++b) {
    table.probabilities[gather_bits(b, qubits, state.n_qubits())] += state(b, b).real();
  }
  return table;
}

double state_fidelity(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace qphe

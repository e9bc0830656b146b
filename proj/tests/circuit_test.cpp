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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qphe/circuit.h"
#include "qphe/pigeonhole.h"
#include "test_util.h"

namespace qphe {
namespace {

using testing::max_abs_diff;

StateVector with_ancilla(const std::string& particles, char ancilla = '0') {
  return StateVector::from_bits(particles + ancilla);
}

double ancilla_one(const StateVector& s) {
  double p = 0.0;
  for (std::size_t b = 0; b < s.dim(); ++b) {
    if (b & 1u) p += std::norm(s[b]);
  }
  return p;
}

TEST(Pair, ParseAndLabel) {
  EXPECT_EQ(Pair::parse("12"), (Pair{0, 1}));
  EXPECT_EQ(Pair::parse("(1,3)"), (Pair{0, 2}));
  EXPECT_EQ(Pair::parse("3,2"), (Pair{1, 2}));
  EXPECT_EQ((Pair{1, 3}).label(), "24");
  EXPECT_THROW(Pair::parse("11"), std::invalid_argument);
  EXPECT_THROW(Pair::parse("1"), std::invalid_argument);
  EXPECT_THROW(Pair::parse("a,b"), std::invalid_argument);
  EXPECT_THROW(Pair::parse("0,1"), std::invalid_argument);
}

TEST(ControlledParity, KeepsAncillaWhenEqual) {
  const auto u = controlled_parity(0, 1, 3, 4);
  for (const char* x : {"000", "001", "110", "111"}) {
    const auto out = apply(u, {0, 1, 2, 3}, with_ancilla(x));
    EXPECT_NEAR(ancilla_one(out), 0.0, tol::kArithmetic) << x;
  }
}

TEST(ControlledParity, FlipsAncillaWhenDifferent) {
  const auto u = controlled_parity(0, 1, 3, 4);
  for (const char* x : {"010", "011", "100", "101"}) {
    const auto out = apply(u, {0, 1, 2, 3}, with_ancilla(x));
    EXPECT_NEAR(ancilla_one(out), 1.0, tol::kArithmetic) << x;
  }
}

TEST(ControlledParity, EqualsTwoCnots) {
  for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    const auto u = controlled_parity(i, j, 3, 4);
    const auto pair_of_cnots = embed(gates::cnot(), {i, 3}, 4) * embed(gates::cnot(), {j, 3}, 4);
    EXPECT_LT(max_abs_diff(u.matrix(), pair_of_cnots.matrix()), tol::kArithmetic);
    EXPECT_LT(max_abs_diff((u * u).matrix(), CMatrix::Identity(16, 16)), tol::kArithmetic);
    EXPECT_LT(max_abs_diff(u.adjoint().matrix(), u.matrix()), tol::kArithmetic);
  }
}

TEST(ControlledParity, MatchesProjectorForm) {
  for (int n : {2, 3}) {
    const CMatrix p = projector_same(0, 1, n).matrix();
    const CMatrix id = CMatrix::Identity(p.rows(), p.cols());
    const CMatrix expect = tensor(Operator(p), Operator::identity(1)).matrix() +
                           tensor(Operator(CMatrix(id - p)), gates::pauli_x()).matrix();
    const auto u = n == 2 ? controlled_parity() : controlled_parity(0, 1, 3, 4);
    EXPECT_LT(max_abs_diff(u.matrix(), expect), tol::kArithmetic);
  }
}

TEST(ControlledParity, RejectsDuplicates) {
  EXPECT_THROW(controlled_parity(0, 0, 3, 4), std::invalid_argument);
  EXPECT_THROW(controlled_parity(0, 3, 3, 4), std::invalid_argument);
  EXPECT_THROW(gate_parity(1, 1, 2), std::invalid_argument);
}

TEST(BuildMzi, SingleParticleOutput) {
  const auto out = run(build_mzi(1), states::zero());
  EXPECT_NEAR(std::abs(out[0] - Complex(0.5, 0.5)), 0.0, tol::kArithmetic);
  EXPECT_NEAR(std::abs(out[1] - Complex(0.5, -0.5)), 0.0, tol::kArithmetic);
}

TEST(BuildMzi, ThreeParticlesUniform) {
  const auto out = run(build_mzi(3), StateVector::from_bits("000"));
  for (std::size_t b = 0; b < 8; ++b) {
    EXPECT_NEAR(std::abs(out[b]), 1.0 / std::sqrt(8.0), tol::kArithmetic);
  }
}

TEST(BuildMzi, ProbeJointDistribution) {
  const auto out = run(build_mzi(3, Pair{0, 1}), StateVector::from_bits("0000"));
  const auto t = measure_distribution(out, {0, 1, 2, 3});
  EXPECT_NEAR(t.at("0001"), 0.125, tol::kArithmetic);
  EXPECT_NEAR(t.at("0000"), 0.0, tol::kArithmetic);
  EXPECT_NEAR(t.total(), 1.0, tol::kArithmetic);
}

TEST(BuildMzi, Layout) {
  const auto c = build_mzi(3, Pair{0, 2});
  EXPECT_EQ(c.n_qubits, 4);
  ASSERT_EQ(c.gates.size(), 10u);
  EXPECT_EQ(c.gates[3].name, "U13");
  EXPECT_EQ(c.gates[4].kind, GateKind::kS);
  EXPECT_EQ(build_mzi(3).n_qubits, 3);
  EXPECT_THROW(build_mzi(2, Pair{0, 2}), std::out_of_range);
  EXPECT_THROW(build_mzi(0), std::invalid_argument);
}

TEST(Run, TrivialCircuits) {
  std::mt19937_64 rng(3);
  const auto psi = testing::random_state(2, rng);
  Circuit empty{2, {}, std::nullopt};
  EXPECT_LT((run(empty, psi).amplitudes() - psi.amplitudes()).norm(), tol::kArithmetic);

  Circuit hh{1, {}, std::nullopt};
  hh.add(gate_h(0)).add(gate_h(0));
  EXPECT_NEAR(state_fidelity(run(hh, states::zero()), states::zero()), 1.0, tol::kArithmetic);
  EXPECT_THROW(run(hh, psi), std::invalid_argument);
  EXPECT_THROW(hh.add(gate_x(1)), std::out_of_range);
}

TEST(Run, DensityMatrixAgreesWithState) {
  const auto c = build_mzi(3, Pair{1, 2});
  const auto psi = StateVector::from_bits("0000");
  const auto rho = run(c, DensityMatrix::from_pure(psi));
  const auto out = run(c, psi);
  EXPECT_LT(max_abs_diff(rho.matrix(), DensityMatrix::from_pure(out).matrix()), tol::kStructural);
  EXPECT_LT((unitary(c).matrix() * psi.amplitudes() - out.amplitudes()).norm(), tol::kStructural);
}

TEST(Interferometer, SuperpositionDecomposition) {
  const CVector lhs = states::plus().amplitudes();
  const CVector rhs = Complex(0.5, -0.5) * states::plus_i().amplitudes() +
                      Complex(0.5, 0.5) * states::minus_i().amplitudes();
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), tol::kArithmetic);
}

TEST(Interferometer, PostSelectionCorrespondence) {
  const auto hs = gates::hadamard() * gates::phase_s();
  const auto from_plus_i = apply(hs, {0}, states::plus_i());
  const auto from_minus_i = apply(hs, {0}, states::minus_i());
  EXPECT_NEAR(state_fidelity(from_plus_i, states::one()), 1.0, tol::kArithmetic);
  EXPECT_NEAR(state_fidelity(from_minus_i, states::zero()), 1.0, tol::kArithmetic);
}

TEST(Interferometer, ProbeIsNoninvasive) {
  const auto bare = measure_distribution(run(build_mzi(3), StateVector::from_bits("000")), {0, 1, 2});
  for (const auto& pair : {Pair{0, 1}, Pair{0, 2}, Pair{1, 2}}) {
    const auto rho = run(build_mzi(3, pair), DensityMatrix::from_pure(StateVector::from_bits("0000")));
    const auto reduced = partial_trace(rho, {0, 1, 2});
    for (std::size_t b = 0; b < 8; ++b) {
      EXPECT_NEAR(reduced(b, b).real(), bare.probabilities[b], tol::kArithmetic);
    }
  }
}

TEST(TextFormat, RoundTrip) {
  const auto c = build_mzi(4, Pair{1, 3});
  const auto text = to_text(c);
  EXPECT_EQ(text.substr(0, 10), "# qubits 5");
  const auto back = parse_circuit(text);
  EXPECT_EQ(back.n_qubits, c.n_qubits);
  ASSERT_TRUE(back.probe.has_value());
  EXPECT_EQ(*back.probe, (Pair{1, 3}));
  EXPECT_EQ(to_text(back), text);
  EXPECT_LT(max_abs_diff(unitary(back).matrix(), unitary(c).matrix()), tol::kArithmetic);
}

TEST(TextFormat, Errors) {
  EXPECT_THROW(parse_circuit("FOO 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("H 0,1\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("U13 0,1,2\n"), std::invalid_argument);
  EXPECT_THROW(parse_circuit("# qubits 1\nX 3\n"), std::out_of_range);
  Circuit c{1, {}, std::nullopt};
  c.add(gate_custom("R", {0}, gates::pauli_y()));
  EXPECT_THROW(to_text(c), std::invalid_argument);
  EXPECT_THROW(gate_custom("bad", {0}, Operator(CMatrix::Identity(2, 2) * 2.0)), std::invalid_argument);
}

}  // namespace
}  // namespace qphe

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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qphe/qstate.h"

namespace qphe {

/// Two particle qubits (0-based). The textual label is 1-based, e.g. {0,1} -> "12".
struct Pair {
  int first = 0;
  int second = 1;

  std::string label() const;
  /// Parses "12", "1,2" or "(1,2)" into {0,1}.
  static Pair parse(std::string_view text);
  friend bool operator==(const Pair&, const Pair&) = default;
};

enum class GateKind { kH, kS, kX, kZ, kCnot, kParity, kCustom };

struct GateOp {
  GateKind kind;
  /// Printed name: H, S, X, Z, CNOT, U12, ... or a custom label.
  std::string name;
  std::vector<int> targets;
  Operator matrix;
};

GateOp gate_h(int q);
GateOp gate_s(int q);
GateOp gate_x(int q);
GateOp gate_z(int q);
GateOp gate_cnot(int control, int target);
/// U_ij acting on (i, j, ancilla); see controlled_parity().
GateOp gate_parity(int i, int j, int ancilla);
GateOp gate_custom(std::string name, std::vector<int> targets, Operator matrix);

/// U_ij = P_ij (x) 1_a + (1 - P_ij) (x) X_a on the three local qubits (i, j, ancilla):
/// the ancilla flips iff the two particle qubits disagree.
Operator controlled_parity();
/// Same operator lifted to an n-qubit register.
Operator controlled_parity(int i, int j, int ancilla, int n_qubits);

struct Circuit {
  int n_qubits = 0;
  std::vector<GateOp> gates;
  std::optional<Pair> probe;

  Circuit& add(GateOp gate);
};

/// H layer -> [U_probe] -> S layer -> H layer on the particle qubits.
/// With a probe, an ancilla is appended as the last qubit.
Circuit build_mzi(int n_particles, std::optional<Pair> probe = std::nullopt);

StateVector run(const Circuit& circuit, const StateVector& input);
DensityMatrix run(const Circuit& circuit, const DensityMatrix& input);

/// Full-register unitary of the circuit.
Operator unitary(const Circuit& circuit);

/// One gate per line, `NAME q[,q...]`, 0-based qubits. A leading
/// `# qubits N` comment records the register size.
std::string to_text(const Circuit& circuit);
Circuit parse_circuit(std::string_view text);

}  // namespace qphe

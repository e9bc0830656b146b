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

#include "qphe/circuit.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace qphe {

namespace {

void check_distinct(std::initializer_list<int> qubits) {
  for (auto a = qubits.begin(); a != qubits.end(); ++a) {
    if (*a < 0) throw std::invalid_argument("negative qubit index");
    for (auto b = a + 1; b != qubits.end(); ++b) {
      if (*a == *b) throw std::invalid_argument("qubit indices must be distinct");
    }
  }
}

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

int parse_int(std::string_view token) {
  int value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string Pair::label() const {
  return std::to_string(first + 1) + std::to_string(second + 1);
}

Pair Pair::parse(std::string_view text) {
  std::string body;
  for (char c : text) {
    if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) continue;
    if (c != ',' && !std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("bad pair '" + std::string(text) + "'");
    }
    body.push_back(c);
  }
  std::vector<int> parts;
  if (const auto comma = body.find(','); comma != std::string::npos) {
    parts.push_back(parse_int(std::string_view(body).substr(0, comma)));
    parts.push_back(parse_int(std::string_view(body).substr(comma + 1)));
  } else {
    // Compact "12" form: single-digit particle labels.
    for (char c : body) parts.push_back(c - '0');
  }
  if (parts.size() != 2 || parts[0] < 1 || parts[1] < 1 || parts[0] == parts[1]) {
    throw std::invalid_argument("bad pair '" + std::string(text) + "'");
  }
  Pair p{parts[0] - 1, parts[1] - 1};
  if (p.first > p.second) std::swap(p.first, p.second);
  return p;
}

GateOp gate_h(int q) { return {GateKind::kH, "H", {q}, gates::hadamard()}; }
GateOp gate_s(int q) { return {GateKind::kS, "S", {q}, gates::phase_s()}; }
GateOp gate_x(int q) { return {GateKind::kX, "X", {q}, gates::pauli_x()}; }
GateOp gate_z(int q) { return {GateKind::kZ, "Z", {q}, gates::pauli_z()}; }

GateOp gate_cnot(int control, int target) {
  check_distinct({control, target});
  return {GateKind::kCnot, "CNOT", {control, target}, gates::cnot()};
}

GateOp gate_parity(int i, int j, int ancilla) {
  check_distinct({i, j, ancilla});
  return {GateKind::kParity, "U" + Pair{i, j}.label(), {i, j, ancilla}, controlled_parity()};
}

GateOp gate_custom(std::string name, std::vector<int> targets, Operator matrix) {
  if (!matrix.is_unitary()) throw std::invalid_argument("custom gate is not unitary");
  return {GateKind::kCustom, std::move(name), std::move(targets), std::move(matrix)};
}

Operator controlled_parity() {
  // Basis |i j a>: flip a iff i != j.
  CMatrix m = CMatrix::Zero(8, 8);
  for (std::size_t b = 0; b < 8; ++b) {
    const bool i = (b >> 2) & 1u;
    const bool j = (b >> 1) & 1u;
    const std::size_t out = (i != j) ? (b ^ 1u) : b;
    m(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(b)) = 1.0;
  }
  return Operator(m, OperatorKind::kUnitary);
}

Operator controlled_parity(int i, int j, int ancilla, int n_qubits) {
  check_distinct({i, j, ancilla});
  return embed(controlled_parity(), {i, j, ancilla}, n_qubits);
}

Circuit& Circuit::add(GateOp gate) {
  for (int q : gate.targets) {
    if (q < 0 || q >= n_qubits) {
      throw std::out_of_range("gate " + gate.name + " targets qubit " + std::to_string(q) +
                              " outside a " + std::to_string(n_qubits) + "-qubit circuit");
    }
  }
  gates.push_back(std::move(gate));
  return *this;
}

Circuit build_mzi(int n_particles, std::optional<Pair> probe) {
  if (n_particles < 1) throw std::invalid_argument("need at least one particle");
  Circuit c;
  c.n_qubits = n_particles + (probe ? 1 : 0);
  c.probe = probe;
  if (probe) {
    if (probe->first < 0 || probe->second >= n_particles || probe->first == probe->second ||
        probe->first >= n_particles || probe->second < 0) {
      throw std::out_of_range("probe pair " + probe->label() + " out of range for " +
                              std::to_string(n_particles) + " particles");
    }
  }
  for (int q = 0; q < n_particles; ++q) c.add(gate_h(q));
  if (probe) c.add(gate_parity(probe->first, probe->second, n_particles));
  for (int q = 0; q < n_particles; ++q) c.add(gate_s(q));
  for (int q = 0; q < n_particles; ++q) c.add(gate_h(q));
  return c;
}

StateVector run(const Circuit& circuit, const StateVector& input) {
  if (input.n_qubits() != circuit.n_qubits) {
    throw std::invalid_argument("input has " + std::to_string(input.n_qubits()) +
                                " qubits, circuit has " + std::to_string(circuit.n_qubits));
  }
  StateVector state = input;
  for (const auto& g : circuit.gates) state = apply(g.matrix, g.targets, state);
  return state;
}

DensityMatrix run(const Circuit& circuit, const DensityMatrix& input) {
  if (input.n_qubits() != circuit.n_qubits) {
    throw std::invalid_argument("input has " + std::to_string(input.n_qubits()) +
                                " qubits, circuit has " + std::to_string(circuit.n_qubits));
  }
  const Operator u = unitary(circuit);
  CMatrix rho = u.matrix() * input.matrix() * u.matrix().adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {input.n_qubits(), std::move(rho), input.is_deviation()};
}

Operator unitary(const Circuit& circuit) {
  const auto d = Eigen::Index{1} << circuit.n_qubits;
  CMatrix u = CMatrix::Identity(d, d);
  for (const auto& g : circuit.gates) {
    u = embed(g.matrix, g.targets, circuit.n_qubits).matrix() * u;
  }
  return Operator(std::move(u), OperatorKind::kUnitary);
}

std::string to_text(const Circuit& circuit) {
  std::ostringstream out;
  out << "# qubits " << circuit.n_qubits << '\n';
  for (const auto& g : circuit.gates) {
    if (g.kind == GateKind::kCustom) {
      throw std::invalid_argument("custom gate '" + g.name + "' has no text form");
    }
    out << g.name << ' ';
    for (std::size_t k = 0; k < g.targets.size(); ++k) {
      if (k) out << ',';
      out << g.targets[k];
    }
    out << '\n';
  }
  return out.str();
}

Circuit parse_circuit(std::string_view text) {
  struct Line {
    std::string name;
    std::vector<int> targets;
    int number;
  };
  std::vector<Line> lines;
  std::optional<int> declared;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream directive(line.substr(1));
      std::string key;
      int n = 0;
      if (directive >> key >> n && key == "qubits") declared = n;
      continue;
    }
    std::istringstream fields(line);
    Line parsed{.name = {}, .targets = {}, .number = number};
    std::string target_list;
    if (!(fields >> parsed.name >> target_list)) {
      throw std::invalid_argument("line " + std::to_string(number) + ": expected NAME targets");
    }
    std::istringstream ts(target_list);
    std::string tok;
    while (std::getline(ts, tok, ',')) parsed.targets.push_back(parse_int(trim(tok)));
    lines.push_back(std::move(parsed));
  }

  Circuit c;
  int max_target = -1;
  for (const auto& l : lines) {
    for (int t : l.targets) max_target = std::max(max_target, t);
  }
  c.n_qubits = declared.value_or(max_target + 1);

  for (const auto& l : lines) {
    const auto arity = [&](std::size_t n) {
      if (l.targets.size() != n) {
        throw std::invalid_argument("line " + std::to_string(l.number) + ": " + l.name +
                                    " takes " + std::to_string(n) + " targets");
      }
    };
    if (l.name == "H") {
      arity(1);
      c.add(gate_h(l.targets[0]));
    } else if (l.name == "S") {
      arity(1);
      c.add(gate_s(l.targets[0]));
    } else if (l.name == "X") {
      arity(1);
      c.add(gate_x(l.targets[0]));
    } else if (l.name == "Z") {
      arity(1);
      c.add(gate_z(l.targets[0]));
    } else if (l.name == "CNOT") {
      arity(2);
      c.add(gate_cnot(l.targets[0], l.targets[1]));
    } else if (l.name.size() > 1 && l.name.front() == 'U') {
      arity(3);
      GateOp g = gate_parity(l.targets[0], l.targets[1], l.targets[2]);
      if (g.name != l.name) {
        throw std::invalid_argument("line " + std::to_string(l.number) + ": " + l.name +
                                    " does not match its targets");
      }
      c.probe = Pair{l.targets[0], l.targets[1]};
      c.add(std::move(g));
    } else {
      throw std::invalid_argument("line " + std::to_string(l.number) + ": unknown gate '" +
                                  l.name + "'");
    }
  }
  return c;
}

}  // namespace qphe

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

#include "qphe/pigeonhole.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace qphe {

namespace {

constexpr double kPossibilityTolerance = 1e-9;
constexpr std::uint64_t kEnumerationLimit = 10'000'000;

void check_outcome(const std::string& outcome, int n_particles) {
  if (static_cast<int>(outcome.size()) != n_particles) {
    throw std::invalid_argument("post-selection '" + outcome + "' must have " +
                                std::to_string(n_particles) + " bits");
  }
  index_of_bits(outcome);  // validates characters
}

StateVector uniform_product(int n, const StateVector& factor) {
  return tensor(std::vector<StateVector>(static_cast<std::size_t>(n), factor));
}

ProbeReport analyse(int n_particles, Pair pair, const std::string& post_outcome) {
  check_outcome(post_outcome, n_particles);
  const Circuit circuit = build_mzi(n_particles, pair);
  const StateVector out = run(circuit, StateVector::basis(circuit.n_qubits, 0));

  std::vector<int> all(static_cast<std::size_t>(circuit.n_qubits));
  std::iota(all.begin(), all.end(), 0);

  ProbeReport r{.n_particles = n_particles,
                .pair = pair,
                .preselected = uniform_product(n_particles, states::plus()),
                .postselection = post_outcome,
                .overlap_same = {},
                .overlap_all_plus_i = {},
                .overlap_all_minus_i = {},
                .joint = measure_distribution(out, all)};

  r.p_post_and_flip = r.joint.at(post_outcome + "1");
  r.p_post = r.joint.at(post_outcome + "0") + r.p_post_and_flip;
  r.p_ancilla_flip_given_post = r.p_post > 0.0 ? r.p_post_and_flip / r.p_post : 0.0;

  const Operator same = projector_same(pair.first, pair.second, n_particles);
  r.overlap_same = overlap(postselection_equivalent(post_outcome), same, r.preselected);
  r.overlap_all_plus_i = overlap(uniform_product(n_particles, states::plus_i()), same, r.preselected);
  r.overlap_all_minus_i =
      overlap(uniform_product(n_particles, states::minus_i()), same, r.preselected);
  r.p_same_before = expectation(same, r.preselected);
  return r;
}

std::string pair_text(int i, int j) { return fmt::format("{},{}", i + 1, j + 1); }

}  // namespace

Operator projector_same(int i, int j, int n_qubits) {
  if (i == j || i < 0 || j < 0 || i >= n_qubits || j >= n_qubits) {
    throw std::invalid_argument(fmt::format("invalid pair ({}, {}) for {} qubits", i, j, n_qubits));
  }
  const auto d = Eigen::Index{1} << n_qubits;
  CMatrix m = CMatrix::Zero(d, d);
  const auto bit = [n_qubits](Eigen::Index b, int q) { return (b >> (n_qubits - 1 - q)) & 1; };
  for (Eigen::Index b = 0; b < d; ++b) {
    if (bit(b, i) == bit(b, j)) m(b, b) = 1.0;
  }
  return Operator(std::move(m), OperatorKind::kProjector);
}

StateVector postselection_equivalent(const std::string& outcome) {
  if (outcome.empty()) throw std::invalid_argument("empty outcome");
  std::vector<StateVector> factors;
  for (char c : outcome) {
    if (c == '0') {
      factors.push_back(states::minus_i());
    } else if (c == '1') {
      factors.push_back(states::plus_i());
    } else {
      throw std::invalid_argument("bad outcome '" + outcome + "'");
    }
  }
  return tensor(factors);
}

ProbeReport qphe_analysis(Pair pair, const std::string& post_outcome) {
  return analyse(3, pair, post_outcome);
}

ProbeReport generalized_qphe(int n_particles, Pair pair, const std::string& post_outcome) {
  if (n_particles < 3 || n_particles > 8) {
    throw std::invalid_argument("generalized analysis supports 3..8 particles, got " +
                                std::to_string(n_particles));
  }
  return analyse(n_particles, pair, post_outcome);
}

OccupancyStats classical_enumeration(int n_particles, int n_boxes) {
  if (n_particles < 1 || n_boxes < 1) throw std::invalid_argument("need particles and boxes >= 1");
  std::uint64_t total = 1;
  for (int k = 0; k < n_particles; ++k) {
    total *= static_cast<std::uint64_t>(n_boxes);
    if (total > kEnumerationLimit) {
      throw std::overflow_error(fmt::format("{}^{} assignments exceed the enumeration limit",
                                            n_boxes, n_particles));
    }
  }

  OccupancyStats s;
  s.n_particles = n_particles;
  s.n_boxes = n_boxes;
  s.total = total;
  s.pair_shares.assign(static_cast<std::size_t>(n_particles),
                       std::vector<std::uint64_t>(static_cast<std::size_t>(n_particles), 0));

  std::vector<int> box(static_cast<std::size_t>(n_particles), 0);
  std::vector<int> occupancy(static_cast<std::size_t>(n_boxes), 0);
  for (std::uint64_t a = 0; a < total; ++a) {
    std::uint64_t code = a;
    std::fill(occupancy.begin(), occupancy.end(), 0);
    for (int p = 0; p < n_particles; ++p) {
      box[static_cast<std::size_t>(p)] = static_cast<int>(code % static_cast<std::uint64_t>(n_boxes));
      code /= static_cast<std::uint64_t>(n_boxes);
      ++occupancy[static_cast<std::size_t>(box[static_cast<std::size_t>(p)])];
    }
    const int fullest = *std::max_element(occupancy.begin(), occupancy.end());
    if (fullest <= 1) ++s.no_two_share;
    if (fullest == n_particles) ++s.all_in_one_box;
    for (int i = 0; i < n_particles; ++i) {
      for (int j = i + 1; j < n_particles; ++j) {
        if (box[static_cast<std::size_t>(i)] == box[static_cast<std::size_t>(j)]) {
          ++s.pair_shares[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
      }
    }
  }
  return s;
}

std::string classical_label(Possibility p) {
  switch (p) {
    case Possibility::kNever: return "never";
    case Possibility::kSometimes: return "sometimes";
    case Possibility::kAlways: return "always";
  }
  return "?";
}

std::string quantum_label(Possibility p) {
  switch (p) {
    case Possibility::kNever: return "impossible";
    case Possibility::kSometimes: return "probabilistic";
    case Possibility::kAlways: return "certain";
  }
  return "?";
}

Possibility possibility_of(double probability) {
  if (std::abs(probability) <= kPossibilityTolerance) return Possibility::kNever;
  if (std::abs(probability - 1.0) <= kPossibilityTolerance) return Possibility::kAlways;
  return Possibility::kSometimes;
}

ArrangementTable build_table(int n_particles) {
  if (n_particles < 2 || n_particles > 6) {
    throw std::invalid_argument("table supports 2..6 particles, got " + std::to_string(n_particles));
  }
  const OccupancyStats classical = classical_enumeration(n_particles, 2);
  const std::size_t n_outcomes = std::size_t{1} << n_particles;

  // flip[(i,j)][outcome] = P(ancilla flipped | particles = outcome) with probe U_ij,
  // i.e. the conditional probability that i and j took different paths.
  std::map<std::pair<int, int>, std::vector<double>> flip;
  for (int i = 0; i < n_particles; ++i) {
    for (int j = i + 1; j < n_particles; ++j) {
      auto& column = flip[{i, j}];
      for (std::size_t o = 0; o < n_outcomes; ++o) {
        column.push_back(
            analyse(n_particles, Pair{i, j}, bits_of_index(o, n_particles)).p_ancilla_flip_given_post);
      }
    }
  }

  ArrangementTable table{.n_particles = n_particles, .rows = {}};
  const auto add_row = [&](std::string arrangement, std::size_t outcome, std::uint64_t count,
                           double quantum) {
    ArrangementRow row;
    row.arrangement = std::move(arrangement);
    row.postselection = bits_of_index(outcome, n_particles);
    row.classical_count = count;
    row.classical_total = classical.total;
    row.classical = possibility_of(static_cast<double>(count) / static_cast<double>(classical.total));
    row.quantum_probability = quantum;
    row.quantum = possibility_of(quantum);
    table.rows.push_back(std::move(row));
  };

  // Each pair is probed in a separate run, so a conjunction over pairs is
  // certain only if every per-pair statement is; the column carries the minimum.
  for (std::size_t outcome : {std::size_t{0}, n_outcomes - 1}) {
    double weakest = 1.0;
    for (const auto& [p, column] : flip) weakest = std::min(weakest, column[outcome]);
    add_row("no two particles share a path", outcome, classical.no_two_share, weakest);
  }

  for (std::size_t outcome = 0; outcome < n_outcomes; ++outcome) {
    for (const auto& [p, column] : flip) {
      const auto [i, j] = p;
      const double p_different = column[outcome];
      const std::uint64_t shares = classical.pair_shares[static_cast<std::size_t>(i)]
                                                         [static_cast<std::size_t>(j)];
      if (p_different >= 0.5) {
        add_row("particles " + pair_text(i, j) + " in different paths", outcome,
                classical.total - shares, p_different);
      } else {
        add_row("particles " + pair_text(i, j) + " share a path", outcome, shares,
                1.0 - p_different);
      }
    }
  }
  return table;
}

std::string to_text(const ArrangementTable& table) {
  std::size_t width = std::string("arrangement").size();
  for (const auto& r : table.rows) width = std::max(width, r.arrangement.size());
  const int post_width = std::max(table.n_particles, 4);

  std::string out = fmt::format("{:<{}}  {:<{}}  {:>9}  {:<9}  {:>12}  {:<13}\n", "arrangement",
                                width, "post", post_width, "classical", "", "quantum", "");
  for (const auto& r : table.rows) {
    out += fmt::format("{:<{}}  {:<{}}  {:>9}  {:<9}  {:>12.6f}  {:<13}\n", r.arrangement, width,
                       r.postselection, post_width,
                       fmt::format("{}/{}", r.classical_count, r.classical_total),
                       classical_label(r.classical), r.quantum_probability,
                       quantum_label(r.quantum));
  }
  return out;
}

std::string to_csv(const ArrangementTable& table) {
  std::string out =
      "arrangement,postselection,classical_count,classical_total,classical,quantum_probability,"
      "quantum\n";
  for (const auto& r : table.rows) {
    out += fmt::format("\"{}\",{},{},{},{},{:.12g},{}\n", r.arrangement, r.postselection,
                       r.classical_count, r.classical_total, classical_label(r.classical),
                       r.quantum_probability, quantum_label(r.quantum));
  }
  return out;
}

}  // namespace qphe

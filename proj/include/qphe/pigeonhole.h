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

// Pre/post-selection analysis of particles in a two-path interferometer.

#include <cstdint>
#include <string>
#include <vector>

#include "qphe/circuit.h"
#include "qphe/qstate.h"

namespace qphe {

/// |00><00| + |11><11| on qubits i, j of an n-qubit register.
Operator projector_same(int i, int j, int n_qubits);

/// Pre-phase state singled out by a detector outcome: bit 0 <-> |-i>, bit 1 <-> |+i>.
StateVector postselection_equivalent(const std::string& outcome);

struct ProbeReport {
  int n_particles = 3;
  Pair pair;
  StateVector preselected;   ///< |+>^N
  std::string postselection; ///< particle outcome, e.g. "000"

  /// <post-equivalent| P_ij |psi_a> for the requested outcome.
  Complex overlap_same;
  /// <+i..+i| P_ij |psi_a> and <-i..-i| P_ij |psi_a>, reported side by side.
  Complex overlap_all_plus_i;
  Complex overlap_all_minus_i;

  double p_post = 0.0;                    ///< P(particles = outcome)
  double p_post_and_flip = 0.0;           ///< P(particles = outcome, ancilla = 1)
  double p_ancilla_flip_given_post = 0.0;
  /// <P_ij> on the preselected state.
  double p_same_before = 0.0;
  /// Joint distribution over (particles..., ancilla).
  ProbabilityTable joint;
};

/// Three particles; runs build_mzi(3, pair) on |000>|0>_a.
ProbeReport qphe_analysis(Pair pair, const std::string& post_outcome);
/// Same pipeline for 3 <= N <= 8 particles.
ProbeReport generalized_qphe(int n_particles, Pair pair, const std::string& post_outcome);

struct OccupancyStats {
  int n_particles = 0;
  int n_boxes = 0;
  std::uint64_t total = 0;
  std::uint64_t no_two_share = 0;
  std::uint64_t all_in_one_box = 0;
  /// Indexed [i][j], i < j: assignments with particles i and j in the same box.
  std::vector<std::vector<std::uint64_t>> pair_shares;
};

/// Exhaustive over n_boxes^n_particles assignments (refuses more than 1e7).
OccupancyStats classical_enumeration(int n_particles, int n_boxes);

enum class Possibility { kNever, kSometimes, kAlways };

std::string classical_label(Possibility p);  // never / sometimes / always
std::string quantum_label(Possibility p);    // impossible / probabilistic / certain

/// {0 -> never, 1 -> always, else sometimes} at tolerance 1e-9.
Possibility possibility_of(double probability);

struct ArrangementRow {
  std::string arrangement;
  std::string postselection;
  std::uint64_t classical_count = 0;
  std::uint64_t classical_total = 0;
  double quantum_probability = 0.0;
  Possibility classical = Possibility::kNever;
  Possibility quantum = Possibility::kNever;
};

struct ArrangementTable {
  int n_particles = 0;
  std::vector<ArrangementRow> rows;
};

/// Two boxes, 2 <= n_particles <= 6. The first rows are the "no two particles
/// share a path" statements post-selected on all-0 and all-1.
ArrangementTable build_table(int n_particles);

std::string to_text(const ArrangementTable& table);
std::string to_csv(const ArrangementTable& table);

}  // namespace qphe

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

// Weakly coupled spin-1/2 register: Zeeman offsets plus Iz.Iz couplings,
// pseudopure preparation and ancilla-detected stick spectra.
//
// Spin k maps to qubit k. Bit 0 is the Iz = +1/2 state.

#include <string>
#include <string_view>
#include <vector>

#include "qphe/circuit.h"
#include "qphe/qstate.h"

namespace qphe::nmr {

struct SpinSystem {
  std::vector<std::string> labels;
  /// Rotating-frame resonance offsets, Hz.
  std::vector<double> nu;
  /// Effective couplings J' = J + 2D, Hz. Symmetric with zero diagonal.
  std::vector<std::vector<double>> jp;
  int ancilla_index = 0;

  int n_spins() const { return static_cast<int>(nu.size()); }
  double coupling(int i, int j) const { return jp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  /// Throws std::invalid_argument on any broken invariant.
  void validate() const;
  /// Spins other than the ancilla, in register order.
  std::vector<int> observed_spins() const;
};

/// JSON: {"labels": [...], "nu_hz": [...], "jp_hz": [[...]], "ancilla_index": k}.
SpinSystem parse_spin_system(std::string_view json_text);
SpinSystem load_spin_system(const std::string& path);
std::string to_json(const SpinSystem& sys);

/// Three 19F particle spins and a 1H ancilla. The numbers are illustrative
/// placeholders, not measured parameters of any molecule.
SpinSystem placeholder_spin_system();

struct PrepSpec {
  double epsilon = 1e-5;
  /// Relative equilibrium polarization per spin; empty means all 1.
  std::vector<double> weights;

  double weight(int spin) const;
};

enum class Axis { kX, kY, kZ };

/// I_x, I_y or I_z of one spin, lifted to the n-spin register.
Operator spin_operator(Axis axis, int spin, int n_spins);
/// exp(-i angle (cos(phase) I_x + sin(phase) I_y)) on one spin, 2x2.
Operator rotation(double angle, double phase);

/// H = -2pi sum_i nu_i Iz_i + 2pi sum_{i<j} J'_ij Iz_i Iz_j in rad/s.
Operator internal_hamiltonian(const SpinSystem& sys);
/// Diagonal of internal_hamiltonian in rad/s.
std::vector<double> energy_levels(const SpinSystem& sys);

/// High-temperature deviation: epsilon * sum_i w_i Iz_i.
DensityMatrix thermal_state(const SpinSystem& sys, const PrepSpec& prep);

/// Ideal transition-selective inversion: swaps two diagonal entries.
DensityMatrix invert_populations(const DensityMatrix& state, std::string_view level_a,
                                 std::string_view level_b);

/// (rho_eq - rho_in) / (2 w_a) = epsilon |0..0><0..0| (x) Iz_a: the deviation part
/// of the partial pseudopure state. The ancilla must be the last spin.
DensityMatrix pseudopure_prepare(const SpinSystem& sys, const PrepSpec& prep);

struct SpectrumLine {
  double frequency_hz = 0.0;
  double amplitude = 0.0;
  /// States of the non-ancilla spins.
  std::string label;
};

struct Spectrum {
  std::vector<SpectrumLine> lines;
  double linewidth_hz = 0.0;

  const SpectrumLine& line(std::string_view label) const;
};

/// Ancilla line frequency for the given non-ancilla configuration, Hz:
/// (E(s, ancilla=1) - E(s, ancilla=0)) / 2pi = nu_a - sum_i J'_ia m_i, m = +1/2 for bit 0.
double line_frequency(const SpinSystem& sys, std::string_view label);

/// Ideal 90 degree y pulse on the ancilla, then one line per configuration s of the
/// other spins with amplitude Re rho'[(s,0),(s,1)]. Thermal equilibrium gives
/// positive lines of height epsilon*w_a/2.
Spectrum detect(const DensityMatrix& state, const SpinSystem& sys);

/// Sum of Lorentzians with full width `linewidth_hz`; an isolated line peaks at its amplitude.
std::vector<double> render(const Spectrum& spectrum, double linewidth_hz,
                           const std::vector<double>& grid_hz);

/// Evenly spaced grid covering every line with `margin_hz` on each side.
std::vector<double> default_grid(const Spectrum& spectrum, double margin_hz, int points);

std::string spectrum_csv(const Spectrum& spectrum);
std::string rendered_csv(const std::vector<double>& grid_hz, const std::vector<double>& intensity);

/// Stages of the ancilla-detected experiment.
enum class Stage { kThermal, kPseudopure, kMzi, kU12, kU13, kU23 };

std::string stage_name(Stage stage);
Stage parse_stage(std::string_view name);
std::vector<Stage> all_stages();

/// Deviation state right before detection at the given stage, with the ideal
/// circuit applied to the pseudopure state for the circuit stages.
DensityMatrix stage_state(const SpinSystem& sys, const PrepSpec& prep, Stage stage);
Spectrum stage_spectrum(const SpinSystem& sys, const PrepSpec& prep, Stage stage);

}  // namespace qphe::nmr

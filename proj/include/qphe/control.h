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

// Pulse-level control of the spin register: ideal hard-pulse/delay sequences
// and GRAPE synthesis of piecewise-constant RF fields.

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "qphe/nmr.h"
#include "qphe/qstate.h"

namespace qphe::control {

enum class SegmentKind { kDelay, kHardPulse, kRfSlice };

struct PulseSegment {
  SegmentKind kind = SegmentKind::kDelay;
  /// Seconds. Hard pulses record a nominal width but evolve instantaneously.
  double duration = 0.0;
  /// Hard pulse: rotation angle per spin (rad) about the common phase axis.
  std::vector<double> angles;
  double phase = 0.0;
  /// RF slice: per-spin amplitudes in rad/s.
  std::vector<double> ux;
  std::vector<double> uy;

  static PulseSegment delay(double seconds);
  static PulseSegment hard_pulse(std::vector<double> angles, double phase);
  static PulseSegment rf_slice(double seconds, std::vector<double> ux, std::vector<double> uy);
};

struct PulseSequence {
  nmr::SpinSystem sys;
  std::vector<PulseSegment> segments;

  double total_duration() const;
  /// Sum of delay and RF-slice durations.
  double free_evolution_time() const;
};

Operator simulate_sequence(const PulseSequence& seq);

/// Phase axes (rad) of the two ancilla pi/2 pulses bracketing the J-evolution
/// block of the CNOT sequence, for a positive control-ancilla coupling. A
/// negative coupling uses kCnotExitPhaseNegativeJ on exit.
inline constexpr double kCnotEntryPhase = 1.5 * std::numbers::pi;  // -y
inline constexpr double kCnotExitPhase = std::numbers::pi;         // -x
inline constexpr double kCnotExitPhaseNegativeJ = 0.0;             // +x

/// C(control)NOT(ancilla) from four delays of 1/(8|J'_ca|) with pi_y refocusing
/// pulses that keep the control-ancilla coupling and cancel every other
/// coupling and the ancilla offset. Equals the ideal CNOT up to z-rotations
/// applied after the gate. Requires three non-ancilla spins.
PulseSequence cnot_reference_sequence(int control_spin, const nmr::SpinSystem& sys);

/// |Tr(U^dagger V)|^2 / d^2.
double fidelity_gate(const Operator& u, const Operator& v);
/// max over D = (x)_k diag(1, e^{i phi_k}) of |Tr(U^dagger D V)|^2 / d^2.
double local_z_invariant_fidelity(const Operator& u, const Operator& v);

/// Named targets on the spin register: identity, cnot1..3 (control particle k,
/// target ancilla), u12, u13, u23.
Operator target_gate(std::string_view name, const nmr::SpinSystem& sys);

struct ControlChannel {
  std::string name;
  std::vector<int> spins;
};

/// One channel per nuclear species, taken from the label prefix (F1 -> F).
std::vector<ControlChannel> species_channels(const nmr::SpinSystem& sys);

struct ControlProblem {
  Operator target;
  int n_segments = 150;
  double dt = 4e-6;
  double max_amplitude = 2.0 * std::numbers::pi * 10e3;
  std::vector<double> rf_scales{0.95, 1.0, 1.05};
  double stop_fidelity = 0.995;
  int max_iterations = 2000;
  /// Empty means species_channels(sys).
  std::vector<ControlChannel> channels{};
  std::uint64_t seed = 1;
  /// Random start spans +-fraction * max_amplitude.
  double initial_fraction = 0.2;
};

enum class Quadrature { kX, kY };

/// Piecewise-constant amplitudes, rad/s, indexed [segment][channel].
struct ControlField {
  std::vector<ControlChannel> channels{};
  std::vector<double> durations;
  std::vector<std::vector<double>> ux;
  std::vector<std::vector<double>> uy;

  int n_segments() const { return static_cast<int>(durations.size()); }
  int n_channels() const { return static_cast<int>(channels.size()); }
  double& at(int segment, int channel, Quadrature q);
  double at(int segment, int channel, Quadrature q) const;
};

ControlField zero_field(const ControlProblem& problem, const nmr::SpinSystem& sys);
ControlField random_field(const ControlProblem& problem, const nmr::SpinSystem& sys);

struct Evaluation {
  std::vector<double> fidelity_per_scale;
  double average = 0.0;
  double worst = 0.0;
  /// d(average)/d(amplitude), same layout as the field. Empty unless requested.
  std::vector<std::vector<double>> grad_x;
  std::vector<std::vector<double>> grad_y;
};

/// Scale-averaged gate fidelity and, optionally, its exact gradient.
Evaluation evaluate(const ControlProblem& problem, const nmr::SpinSystem& sys,
                    const ControlField& field, bool with_gradient);

struct GrapeResult {
  ControlField field;
  std::vector<double> fidelity_per_scale;
  double average = 0.0;
  double worst = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Average fidelity after each accepted iteration; entry 0 is the start.
  std::vector<double> history;
};

using IterationCallback = std::function<void(int iteration, double average)>;

/// Starts from `initial`, or a seeded random field when omitted.
GrapeResult grape_optimize(const ControlProblem& problem, const nmr::SpinSystem& sys,
                           const ControlField* initial = nullptr,
                           const IterationCallback& on_iteration = {});

struct GradientCheck {
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

/// Central difference with step relative_step * max_amplitude.
GradientCheck gradient_check(const ControlProblem& problem, const nmr::SpinSystem& sys,
                             const ControlField& field, int segment, int channel, Quadrature q,
                             double relative_step = 1e-4);

/// Expands channels to per-spin RF slices.
PulseSequence to_sequence(const ControlField& field, const nmr::SpinSystem& sys);

/// segment_index,duration_s,channel,u_x,u_y
std::string controls_csv(const ControlField& field);

/// One segment per line: `delay T`, `pulse phase=P angles=a,b,..`, `rf dt=T ux=.. uy=..`.
std::string to_text(const PulseSequence& seq);
PulseSequence parse_sequence(std::string_view text, const nmr::SpinSystem& sys);

}  // namespace qphe::control
